#pragma once

#include "topicforge/dtm.hpp"
#include "topicforge/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace topicforge {

enum class ModelKind { Lda, Plsa, Nmf };

std::string_view to_string(ModelKind kind);
/// Case-insensitive "lda" / "plsa" / "nmf".
std::optional<ModelKind> parse_model_kind(std::string_view name);

struct FitMeta
{
    std::size_t iterations = 0;
    double objective = 0.0;
    std::uint64_t seed = 0;
    /// Per-iteration objective; meaning depends on the model kind
    /// (log-likelihood for PLSA, squared Frobenius error for NMF).
    std::vector<double> objective_trace;
    std::vector<std::string> warnings;

    bool operator==(const FitMeta&) const = default;
};

/// Common output of all fitters. topic_word is K x V and doc_topic is
/// n_train_docs x K; every row of both is a probability distribution.
struct TopicModel
{
    ModelKind kind = ModelKind::Lda;
    Matrix topic_word;
    Matrix doc_topic;
    std::shared_ptr<const Vocabulary> vocab;
    FitMeta meta;

    std::size_t num_topics() const noexcept { return topic_word.rows(); }
    std::size_t vocab_size() const noexcept { return topic_word.cols(); }

    /// Throws std::logic_error if a shape or row-sum invariant is broken.
    void validate(double tolerance = 1e-9) const;
};

struct RankedTerm
{
    TermId id = 0;
    std::string term;
    double weight = 0.0;

    bool operator==(const RankedTerm&) const = default;
};

struct TopicTermRanking
{
    std::size_t topic_id = 0;
    std::vector<RankedTerm> ranked_terms;
};

/// Top-n terms by weight, ties broken by ascending term id. n is clamped to
/// the vocabulary size. Throws std::invalid_argument for a bad topic id or n = 0.
TopicTermRanking top_n_words(const TopicModel& model, std::size_t topic_id, std::size_t n);

/// p(w|d) = sum_k p(k|d) p(w|k).
std::vector<double> predictive_word_dist(const TopicModel& model,
                                         std::span<const double> doc_topic_row);

/// JSON document with kind, K, seed, vocabulary and dense rows. Doubles are
/// written in shortest round-trip form, so write -> read -> write is stable.
void write_model(std::ostream& out, const TopicModel& model);
TopicModel read_model(std::istream& in);

} // namespace topicforge
