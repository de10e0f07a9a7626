#include "topicforge/dtm.hpp"

#include "topicforge/random.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace topicforge {

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<std::size_t> doc_freq)
    : terms_(std::move(terms)), doc_freq_(std::move(doc_freq))
{
    if (terms_.size() != doc_freq_.size()) {
        throw std::invalid_argument("vocabulary terms and doc_freq differ in length");
    }
    index_.reserve(terms_.size());
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (!index_.emplace(terms_[i], static_cast<TermId>(i)).second) {
            throw std::invalid_argument("duplicate vocabulary term '" + terms_[i] + "'");
        }
    }
}

Vocabulary Vocabulary::synthetic(std::size_t n_terms)
{
    std::vector<std::string> terms;
    terms.reserve(n_terms);
    for (std::size_t i = 0; i < n_terms; ++i) {
        terms.push_back("t" + std::to_string(i));
    }
    return Vocabulary(std::move(terms), std::vector<std::size_t>(n_terms, 0));
}

std::optional<TermId> Vocabulary::find(const std::string& term) const
{
    if (auto it = index_.find(term); it != index_.end()) {
        return it->second;
    }
    return std::nullopt;
}

DocTermMatrix::DocTermMatrix(std::vector<std::vector<TermCount>> rows,
                             std::vector<std::size_t> doc_ids,
                             std::shared_ptr<const Vocabulary> vocab)
    : doc_ids_(std::move(doc_ids)), vocab_(std::move(vocab))
{
    if (!vocab_) {
        throw std::invalid_argument("document-term matrix needs a vocabulary");
    }
    if (rows.size() != doc_ids_.size()) {
        throw std::invalid_argument("row count and doc id count differ");
    }
    offsets_.reserve(rows.size() + 1);
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (row[i].term >= vocab_->size()) {
                throw std::invalid_argument("term id out of vocabulary range");
            }
            if (row[i].count == 0) {
                throw std::invalid_argument("zero count stored in sparse row");
            }
            if (i > 0 && row[i].term <= row[i - 1].term) {
                throw std::invalid_argument("sparse row terms must be strictly ascending");
            }
        }
        entries_.insert(entries_.end(), row.begin(), row.end());
        offsets_.push_back(entries_.size());
    }
}

DocTermMatrix DocTermMatrix::from_dense(const std::vector<std::vector<std::uint32_t>>& counts)
{
    const std::size_t n_terms = counts.empty() ? 0 : counts.front().size();
    std::vector<std::vector<TermCount>> rows;
    std::vector<std::size_t> ids;
    std::vector<std::size_t> df(n_terms, 0);
    for (std::size_t d = 0; d < counts.size(); ++d) {
        if (counts[d].size() != n_terms) {
            throw std::invalid_argument("ragged dense count matrix");
        }
        std::vector<TermCount> row;
        for (std::size_t t = 0; t < n_terms; ++t) {
            if (counts[d][t] > 0) {
                row.push_back({static_cast<TermId>(t), counts[d][t]});
                ++df[t];
            }
        }
        rows.push_back(std::move(row));
        ids.push_back(d);
    }
    auto vocab = Vocabulary::synthetic(n_terms);
    std::vector<std::string> terms = vocab.terms();
    return DocTermMatrix(std::move(rows), std::move(ids),
                         std::make_shared<Vocabulary>(std::move(terms), std::move(df)));
}

std::size_t DocTermMatrix::doc_length(std::size_t d) const
{
    std::size_t n = 0;
    for (const auto& e : row(d)) {
        n += e.count;
    }
    return n;
}

std::uint64_t DocTermMatrix::total_mass() const
{
    std::uint64_t n = 0;
    for (const auto& e : entries_) {
        n += e.count;
    }
    return n;
}

DocTermMatrix DocTermMatrix::select_rows(std::span<const std::size_t> positions) const
{
    std::vector<std::vector<TermCount>> rows;
    std::vector<std::size_t> ids;
    rows.reserve(positions.size());
    for (auto p : positions) {
        auto r = row(p);
        rows.emplace_back(r.begin(), r.end());
        ids.push_back(doc_ids_.at(p));
    }
    return DocTermMatrix(std::move(rows), std::move(ids), vocab_);
}

CooccurrenceStats::CooccurrenceStats(std::size_t doc_count, std::vector<std::size_t> single,
                                     std::unordered_map<std::uint64_t, std::size_t> pair)
    : doc_count_(doc_count), single_(std::move(single)), pair_(std::move(pair))
{}

std::uint64_t CooccurrenceStats::pair_key(TermId a, TermId b)
{
    if (a > b) {
        std::swap(a, b);
    }
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

std::size_t CooccurrenceStats::pair(TermId a, TermId b) const
{
    if (a == b) {
        throw std::invalid_argument("co-occurrence of a term with itself is undefined");
    }
    if (a >= single_.size() || b >= single_.size()) {
        throw std::out_of_range("term id outside co-occurrence statistics");
    }
    auto it = pair_.find(pair_key(a, b));
    return it == pair_.end() ? 0 : it->second;
}

Vocabulary build_vocabulary(std::span<const TokenizedDoc> docs, std::size_t min_df,
                            double max_df_fraction)
{
    if (min_df < 1) {
        throw std::invalid_argument("min_df must be at least 1");
    }
    if (!(max_df_fraction > 0.0 && max_df_fraction <= 1.0)) {
        throw std::invalid_argument("max_df_fraction must lie in (0, 1]");
    }
    std::map<std::string, std::size_t> df;
    for (const auto& doc : docs) {
        std::vector<std::string> unique = doc.tokens;
        std::sort(unique.begin(), unique.end());
        unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
        for (auto& t : unique) {
            ++df[std::move(t)];
        }
    }
    const double max_df = max_df_fraction * static_cast<double>(docs.size());
    std::vector<std::string> terms;
    std::vector<std::size_t> freqs;
    for (auto& [term, f] : df) {
        if (f >= min_df && static_cast<double>(f) <= max_df) {
            terms.push_back(term);
            freqs.push_back(f);
        }
    }
    if (terms.empty()) {
        throw EmptyVocabularyError();
    }
    return Vocabulary(std::move(terms), std::move(freqs));
}

DocTermMatrix build_matrix(std::span<const TokenizedDoc> docs,
                           std::shared_ptr<const Vocabulary> vocab)
{
    if (!vocab || vocab->size() == 0) {
        throw std::invalid_argument("build_matrix needs a non-empty vocabulary");
    }
    std::vector<std::vector<TermCount>> rows;
    std::vector<std::size_t> ids;
    std::vector<std::size_t> excluded;
    for (const auto& doc : docs) {
        std::map<TermId, std::uint32_t> counts;
        for (const auto& t : doc.tokens) {
            if (auto id = vocab->find(t)) {
                ++counts[*id];
            }
        }
        if (counts.empty()) {
            excluded.push_back(doc.record_id);
            continue;
        }
        std::vector<TermCount> row;
        row.reserve(counts.size());
        for (auto [term, count] : counts) {
            row.push_back({term, count});
        }
        rows.push_back(std::move(row));
        ids.push_back(doc.record_id);
    }
    DocTermMatrix matrix(std::move(rows), std::move(ids), std::move(vocab));
    matrix.set_excluded_ids(std::move(excluded));
    return matrix;
}

CorpusSplit split_train_test(const DocTermMatrix& matrix, double ratio, std::uint64_t seed)
{
    if (!(ratio > 0.0 && ratio <= 1.0)) {
        throw std::invalid_argument("split ratio must lie in (0, 1]");
    }
    if (matrix.empty()) {
        throw std::invalid_argument("cannot split an empty matrix");
    }
    const std::size_t n = matrix.n_docs();
    auto n_train = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n)));
    n_train = std::min(n_train, n);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));

    std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {matrix.select_rows(train), matrix.select_rows(test), seed, ratio};
}

CooccurrenceStats cooccurrence_counts(std::span<const TokenizedDoc> docs, const Vocabulary& vocab)
{
    std::vector<std::size_t> single(vocab.size(), 0);
    std::unordered_map<std::uint64_t, std::size_t> pair;
    std::vector<TermId> present;
    for (const auto& doc : docs) {
        present.clear();
        for (const auto& t : doc.tokens) {
            if (auto id = vocab.find(t)) {
                present.push_back(*id);
            }
        }
        std::sort(present.begin(), present.end());
        present.erase(std::unique(present.begin(), present.end()), present.end());
        for (std::size_t i = 0; i < present.size(); ++i) {
            ++single[present[i]];
            for (std::size_t j = i + 1; j < present.size(); ++j) {
                ++pair[CooccurrenceStats::pair_key(present[i], present[j])];
            }
        }
    }
    return CooccurrenceStats(docs.size(), std::move(single), std::move(pair));
}

void write_matrix_dump(std::ostream& out, const DocTermMatrix& matrix)
{
    for (std::size_t d = 0; d < matrix.n_docs(); ++d) {
        for (const auto& e : matrix.row(d)) {
            out << matrix.doc_id(d) << ' ' << e.term << ' ' << e.count << '\n';
        }
    }
}

void write_vocabulary_sidecar(std::ostream& out, const Vocabulary& vocab)
{
    for (TermId t = 0; t < vocab.size(); ++t) {
        out << t << ' ' << vocab.term(t) << ' ' << vocab.doc_freq(t) << '\n';
    }
}

} // namespace topicforge
