#pragma once

#include "topicforge/textprep.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace topicforge {

using TermId = std::uint32_t;

class Vocabulary
{
public:
    Vocabulary() = default;
    /// `terms` must be unique; `doc_freq` parallel to `terms`.
    Vocabulary(std::vector<std::string> terms, std::vector<std::size_t> doc_freq);

    /// Placeholder vocabulary "t0".."t{n-1}" for matrices built from raw counts.
    static Vocabulary synthetic(std::size_t n_terms);

    std::size_t size() const noexcept { return terms_.size(); }
    const std::string& term(TermId id) const { return terms_.at(id); }
    std::size_t doc_freq(TermId id) const { return doc_freq_.at(id); }
    std::optional<TermId> find(const std::string& term) const;
    const std::vector<std::string>& terms() const noexcept { return terms_; }

    bool operator==(const Vocabulary& other) const
    {
        return terms_ == other.terms_ && doc_freq_ == other.doc_freq_;
    }

private:
    std::vector<std::string> terms_;
    std::vector<std::size_t> doc_freq_;
    std::unordered_map<std::string, TermId> index_;
};

class EmptyVocabularyError : public std::runtime_error
{
public:
    EmptyVocabularyError() : std::runtime_error("vocabulary empty after filtering") {}
};

struct TermCount
{
    TermId term = 0;
    std::uint32_t count = 0;

    bool operator==(const TermCount&) const = default;
};

/// One document's sparse term counts, sorted by term id.
using SparseDoc = std::span<const TermCount>;

/// Sparse document-term counts in compressed-row form. Rows hold distinct
/// term ids in ascending order, every count is positive.
class DocTermMatrix
{
public:
    DocTermMatrix() = default;

    /// Validates rows (ids < vocab size, strictly ascending, counts > 0).
    DocTermMatrix(std::vector<std::vector<TermCount>> rows, std::vector<std::size_t> doc_ids,
                  std::shared_ptr<const Vocabulary> vocab);

    /// Dense counts (rows = documents) with a synthetic vocabulary; zero
    /// entries are dropped. Doc ids are 0..n-1.
    static DocTermMatrix from_dense(const std::vector<std::vector<std::uint32_t>>& counts);

    std::size_t n_docs() const noexcept { return doc_ids_.size(); }
    std::size_t n_terms() const noexcept { return vocab_ ? vocab_->size() : 0; }
    std::size_t nnz() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return n_docs() == 0; }

    SparseDoc row(std::size_t d) const
    {
        return {entries_.data() + offsets_[d], offsets_[d + 1] - offsets_[d]};
    }
    std::size_t doc_id(std::size_t d) const { return doc_ids_.at(d); }
    const std::vector<std::size_t>& doc_ids() const noexcept { return doc_ids_; }
    std::size_t doc_length(std::size_t d) const;
    std::uint64_t total_mass() const;

    const Vocabulary& vocabulary() const { return *vocab_; }
    std::shared_ptr<const Vocabulary> vocabulary_ptr() const { return vocab_; }

    /// Record ids of documents dropped by build_matrix because no token survived.
    const std::vector<std::size_t>& excluded_ids() const noexcept { return excluded_ids_; }
    void set_excluded_ids(std::vector<std::size_t> ids) { excluded_ids_ = std::move(ids); }

    /// Rows at the given positions, in the given order.
    DocTermMatrix select_rows(std::span<const std::size_t> positions) const;

private:
    std::vector<std::size_t> offsets_{0};
    std::vector<TermCount> entries_;
    std::vector<std::size_t> doc_ids_;
    std::vector<std::size_t> excluded_ids_;
    std::shared_ptr<const Vocabulary> vocab_;
};

struct CorpusSplit
{
    DocTermMatrix train;
    DocTermMatrix test;
    std::uint64_t seed = 0;
    double ratio = 1.0;
};

/// Document-level presence counts: how many documents contain a term, and
/// how many contain both terms of a pair.
class CooccurrenceStats
{
public:
    CooccurrenceStats() = default;
    CooccurrenceStats(std::size_t doc_count, std::vector<std::size_t> single,
                      std::unordered_map<std::uint64_t, std::size_t> pair);

    std::size_t doc_count() const noexcept { return doc_count_; }
    std::size_t n_terms() const noexcept { return single_.size(); }
    std::size_t single(TermId t) const { return single_.at(t); }
    /// Symmetric; throws std::invalid_argument when a == b.
    std::size_t pair(TermId a, TermId b) const;
    std::size_t stored_pairs() const noexcept { return pair_.size(); }

    static std::uint64_t pair_key(TermId a, TermId b);

private:
    std::size_t doc_count_ = 0;
    std::vector<std::size_t> single_;
    std::unordered_map<std::uint64_t, std::size_t> pair_;
};

/// Terms whose document frequency lies in [min_df, max_df_fraction * n_docs],
/// in lexicographic order. Throws EmptyVocabularyError if none survive.
Vocabulary build_vocabulary(std::span<const TokenizedDoc> docs, std::size_t min_df = 2,
                            double max_df_fraction = 0.5);

/// Out-of-vocabulary tokens are dropped; documents left empty are removed and
/// their record ids kept in excluded_ids().
DocTermMatrix build_matrix(std::span<const TokenizedDoc> docs,
                           std::shared_ptr<const Vocabulary> vocab);

/// ceil(ratio * n_docs) documents go to train, chosen by a seeded shuffle;
/// both halves keep the original row order.
CorpusSplit split_train_test(const DocTermMatrix& matrix, double ratio, std::uint64_t seed);

CooccurrenceStats cooccurrence_counts(std::span<const TokenizedDoc> docs, const Vocabulary& vocab);

/// `doc_id term_id count` per line.
void write_matrix_dump(std::ostream& out, const DocTermMatrix& matrix);
/// `term_id term doc_freq` per line.
void write_vocabulary_sidecar(std::ostream& out, const Vocabulary& vocab);

} // namespace topicforge
