#pragma once

#include "topicforge/model_api.hpp"
#include "topicforge/random.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace topicforge {

struct LdaConfig
{
    std::size_t num_topics = 10;
    /// Symmetric document-topic prior; unset means 50 / K.
    std::optional<double> alpha;
    double beta = 0.01;
    std::size_t iterations = 1000;
    std::size_t burn_in = 500;
    /// Estimates are averaged over every `thin`-th sweep after burn-in.
    std::size_t thin = 10;
    std::uint64_t seed = 0;

    double effective_alpha(std::size_t k) const { return alpha ? *alpha : 50.0 / static_cast<double>(k); }
    double effective_alpha() const { return effective_alpha(num_topics); }
    void validate() const;
};

/// Token-level state of the collapsed Gibbs sampler. Tokens of a document are
/// contiguous; counts are kept consistent with the assignments after every
/// single-token update.
class GibbsState
{
public:
    /// Assigns every token a uniformly random topic.
    GibbsState(const DocTermMatrix& matrix, std::size_t num_topics, Rng& rng);

    std::size_t num_topics() const noexcept { return k_; }
    std::size_t num_docs() const noexcept { return doc_offsets_.size() - 1; }
    std::size_t vocab_size() const noexcept { return v_; }
    std::size_t num_tokens() const noexcept { return token_term_.size(); }

    std::size_t doc_begin(std::size_t d) const { return doc_offsets_[d]; }
    std::size_t doc_end(std::size_t d) const { return doc_offsets_[d + 1]; }
    TermId token_term(std::size_t i) const { return token_term_[i]; }
    std::uint32_t token_topic(std::size_t i) const { return token_topic_[i]; }

    std::uint32_t n_dk(std::size_t d, std::size_t k) const { return n_dk_[d * k_ + k]; }
    std::uint32_t n_kw(std::size_t k, TermId w) const { return n_wk_[w * k_ + k]; }
    std::uint32_t n_k(std::size_t k) const { return n_k_[k]; }

    /// Normalized full conditional for token i with its own assignment removed.
    std::vector<double> conditional(std::size_t token, double alpha, double beta) const;

    /// One full sweep over all tokens in document order.
    void sweep(double alpha, double beta, Rng& rng);

    /// Recounts from the assignments and compares with the stored counts.
    bool counts_consistent() const;

private:
    std::size_t k_;
    std::size_t v_;
    std::vector<std::size_t> doc_offsets_;
    std::vector<TermId> token_term_;
    std::vector<std::uint32_t> token_topic_;
    std::vector<std::uint32_t> n_dk_;
    std::vector<std::uint32_t> n_wk_;
    std::vector<std::uint32_t> n_k_;
    std::vector<double> scratch_;
};

/// Called after every sweep (1-based sweep index).
using GibbsObserver = std::function<void(std::size_t sweep, const GibbsState&)>;

/// Collapsed Gibbs sampling. topic_word and doc_topic are the smoothed
/// estimates averaged over the thinned post-burn-in sweeps (the final sweep is
/// always included). Deterministic for a fixed seed.
TopicModel fit_lda(const DocTermMatrix& matrix, const LdaConfig& config,
                   const GibbsObserver& observer = {});

/// Topic mixture of an unseen document, sampled with topic_word held fixed.
/// An empty document returns the uniform prior 1/K.
std::vector<double> lda_fold_in(const TopicModel& model, SparseDoc doc, const LdaConfig& config);

} // namespace topicforge
