#include "topicforge/model_lda.hpp"

#include <cmath>
#include <stdexcept>

namespace topicforge {

namespace {

// Draws an index from unnormalized non-negative weights.
std::size_t draw(std::span<const double> cumulative, Rng& rng)
{
    const double u = rng.uniform() * cumulative.back();
    for (std::size_t k = 0; k < cumulative.size(); ++k) {
        if (u < cumulative[k]) {
            return k;
        }
    }
    // Rounding can leave u == total; take the last topic with positive mass.
    for (std::size_t k = cumulative.size(); k-- > 0;) {
        if (k == 0 || cumulative[k] > cumulative[k - 1]) {
            return k;
        }
    }
    return 0;
}

bool is_sample_sweep(std::size_t sweep, const LdaConfig& config)
{
    return sweep == config.iterations ||
           (sweep > config.burn_in && (sweep - config.burn_in) % config.thin == 0);
}

} // namespace

void LdaConfig::validate() const
{
    if (num_topics < 1) {
        throw std::invalid_argument("LDA needs K >= 1");
    }
    if (alpha && !(*alpha > 0.0)) {
        throw std::invalid_argument("LDA alpha must be positive");
    }
    if (!(beta > 0.0)) {
        throw std::invalid_argument("LDA beta must be positive");
    }
    if (iterations <= burn_in) {
        throw std::invalid_argument("LDA iterations must exceed burn_in");
    }
    if (thin < 1) {
        throw std::invalid_argument("LDA thin must be at least 1");
    }
}

GibbsState::GibbsState(const DocTermMatrix& matrix, std::size_t num_topics, Rng& rng)
    : k_(num_topics), v_(matrix.n_terms()), n_dk_(matrix.n_docs() * num_topics, 0),
      n_wk_(matrix.n_terms() * num_topics, 0), n_k_(num_topics, 0), scratch_(num_topics, 0.0)
{
    doc_offsets_.reserve(matrix.n_docs() + 1);
    doc_offsets_.push_back(0);
    for (std::size_t d = 0; d < matrix.n_docs(); ++d) {
        for (const auto& e : matrix.row(d)) {
            token_term_.insert(token_term_.end(), e.count, e.term);
        }
        doc_offsets_.push_back(token_term_.size());
    }
    token_topic_.resize(token_term_.size());
    for (std::size_t d = 0; d + 1 < doc_offsets_.size(); ++d) {
        for (std::size_t i = doc_offsets_[d]; i < doc_offsets_[d + 1]; ++i) {
            const auto k = static_cast<std::uint32_t>(rng.below(k_));
            token_topic_[i] = k;
            ++n_dk_[d * k_ + k];
            ++n_wk_[token_term_[i] * k_ + k];
            ++n_k_[k];
        }
    }
}

std::vector<double> GibbsState::conditional(std::size_t token, double alpha, double beta) const
{
    std::size_t d = 0;
    while (doc_offsets_[d + 1] <= token) {
        ++d;
    }
    const TermId w = token_term_[token];
    const std::uint32_t current = token_topic_[token];
    const double v_beta = static_cast<double>(v_) * beta;
    std::vector<double> p(k_);
    double total = 0.0;
    for (std::size_t k = 0; k < k_; ++k) {
        const double own = (k == current) ? 1.0 : 0.0;
        p[k] = (n_dk_[d * k_ + k] - own + alpha) * (n_wk_[w * k_ + k] - own + beta) /
               (n_k_[k] - own + v_beta);
        total += p[k];
    }
    for (auto& x : p) {
        x /= total;
    }
    return p;
}

void GibbsState::sweep(double alpha, double beta, Rng& rng)
{
    const double v_beta = static_cast<double>(v_) * beta;
    for (std::size_t d = 0; d + 1 < doc_offsets_.size(); ++d) {
        std::uint32_t* doc_counts = n_dk_.data() + d * k_;
        for (std::size_t i = doc_offsets_[d]; i < doc_offsets_[d + 1]; ++i) {
            const TermId w = token_term_[i];
            std::uint32_t* word_counts = n_wk_.data() + static_cast<std::size_t>(w) * k_;
            const std::uint32_t old = token_topic_[i];
            --doc_counts[old];
            --word_counts[old];
            --n_k_[old];

            double total = 0.0;
            for (std::size_t k = 0; k < k_; ++k) {
                total += (doc_counts[k] + alpha) * (word_counts[k] + beta) / (n_k_[k] + v_beta);
                scratch_[k] = total;
            }
            const auto k_new = static_cast<std::uint32_t>(draw(scratch_, rng));

            token_topic_[i] = k_new;
            ++doc_counts[k_new];
            ++word_counts[k_new];
            ++n_k_[k_new];
        }
    }
}

bool GibbsState::counts_consistent() const
{
    std::vector<std::uint32_t> dk(n_dk_.size(), 0), wk(n_wk_.size(), 0), kk(k_, 0);
    for (std::size_t d = 0; d + 1 < doc_offsets_.size(); ++d) {
        for (std::size_t i = doc_offsets_[d]; i < doc_offsets_[d + 1]; ++i) {
            const auto k = token_topic_[i];
            ++dk[d * k_ + k];
            ++wk[token_term_[i] * k_ + k];
            ++kk[k];
        }
    }
    return dk == n_dk_ && wk == n_wk_ && kk == n_k_;
}

TopicModel fit_lda(const DocTermMatrix& matrix, const LdaConfig& config,
                   const GibbsObserver& observer)
{
    config.validate();
    if (matrix.empty() || matrix.total_mass() == 0) {
        throw std::invalid_argument("LDA needs a non-empty document-term matrix");
    }
    const std::size_t k_topics = config.num_topics;
    const std::size_t v = matrix.n_terms();
    const std::size_t n_docs = matrix.n_docs();
    const double alpha = config.effective_alpha();
    const double beta = config.beta;
    const double v_beta = static_cast<double>(v) * beta;
    const double k_alpha = static_cast<double>(k_topics) * alpha;

    Rng rng(config.seed);
    GibbsState state(matrix, k_topics, rng);

    Matrix phi_sum(k_topics, v);
    Matrix theta_sum(n_docs, k_topics);
    std::size_t samples = 0;

    for (std::size_t sweep = 1; sweep <= config.iterations; ++sweep) {
        state.sweep(alpha, beta, rng);
        if (observer) {
            observer(sweep, state);
        }
        if (!is_sample_sweep(sweep, config)) {
            continue;
        }
        ++samples;
        for (std::size_t k = 0; k < k_topics; ++k) {
            const double denom = state.n_k(k) + v_beta;
            auto row = phi_sum.row(k);
            for (TermId w = 0; w < v; ++w) {
                row[w] += (state.n_kw(k, w) + beta) / denom;
            }
        }
        for (std::size_t d = 0; d < n_docs; ++d) {
            const double denom = static_cast<double>(state.doc_end(d) - state.doc_begin(d)) + k_alpha;
            auto row = theta_sum.row(d);
            for (std::size_t k = 0; k < k_topics; ++k) {
                row[k] += (state.n_dk(d, k) + alpha) / denom;
            }
        }
    }

    TopicModel model;
    model.kind = ModelKind::Lda;
    model.vocab = matrix.vocabulary_ptr();
    model.topic_word = std::move(phi_sum);
    model.doc_topic = std::move(theta_sum);
    const double inv = 1.0 / static_cast<double>(samples);
    for (auto& x : model.topic_word.values()) {
        x *= inv;
    }
    for (auto& x : model.doc_topic.values()) {
        x *= inv;
    }

    double loglik = 0.0;
    for (std::size_t d = 0; d < n_docs; ++d) {
        const auto dist = predictive_word_dist(model, model.doc_topic.row(d));
        for (const auto& e : matrix.row(d)) {
            loglik += e.count * std::log(dist[e.term]);
        }
    }
    model.meta.iterations = config.iterations;
    model.meta.objective = loglik;
    model.meta.seed = config.seed;
    return model;
}

std::vector<double> lda_fold_in(const TopicModel& model, SparseDoc doc, const LdaConfig& config)
{
    if (model.kind != ModelKind::Lda) {
        throw std::invalid_argument("lda_fold_in needs an LDA model");
    }
    config.validate();
    const std::size_t k_topics = model.num_topics();
    const double alpha = config.effective_alpha(k_topics);

    std::vector<TermId> tokens;
    for (const auto& e : doc) {
        if (e.term >= model.vocab_size()) {
            throw std::invalid_argument("held-out term id outside model vocabulary");
        }
        tokens.insert(tokens.end(), e.count, e.term);
    }
    std::vector<double> theta(k_topics, 1.0 / static_cast<double>(k_topics));
    if (tokens.empty()) {
        return theta;
    }

    Rng rng(config.seed);
    std::vector<std::uint32_t> z(tokens.size());
    std::vector<std::uint32_t> n_dk(k_topics, 0);
    for (auto& zi : z) {
        zi = static_cast<std::uint32_t>(rng.below(k_topics));
        ++n_dk[zi];
    }

    std::vector<double> cumulative(k_topics);
    std::vector<double> theta_sum(k_topics, 0.0);
    std::size_t samples = 0;
    const double denom = static_cast<double>(tokens.size()) + static_cast<double>(k_topics) * alpha;
    for (std::size_t sweep = 1; sweep <= config.iterations; ++sweep) {
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            --n_dk[z[i]];
            double total = 0.0;
            for (std::size_t k = 0; k < k_topics; ++k) {
                total += (n_dk[k] + alpha) * model.topic_word(k, tokens[i]);
                cumulative[k] = total;
            }
            if (total > 0.0) {
                z[i] = static_cast<std::uint32_t>(draw(cumulative, rng));
            }
            ++n_dk[z[i]];
        }
        if (is_sample_sweep(sweep, config)) {
            ++samples;
            for (std::size_t k = 0; k < k_topics; ++k) {
                theta_sum[k] += (n_dk[k] + alpha) / denom;
            }
        }
    }
    for (std::size_t k = 0; k < k_topics; ++k) {
        theta[k] = theta_sum[k] / static_cast<double>(samples);
    }
    return theta;
}

} // namespace topicforge
