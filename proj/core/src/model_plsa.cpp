#include "topicforge/model_plsa.hpp"

#include "topicforge/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace topicforge {

namespace {

constexpr double kValidationEpsilon = 1e-12;

void normalize_rows(Matrix& m)
{
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = m.row(r);
        const double sum = std::accumulate(row.begin(), row.end(), 0.0);
        for (auto& x : row) {
            x /= sum;
        }
    }
}

Matrix random_stochastic(std::size_t rows, std::size_t cols, Rng& rng)
{
    Matrix m(rows, cols);
    for (auto& x : m.values()) {
        x = rng.uniform_positive();
    }
    normalize_rows(m);
    return m;
}

double relative_gain(double prev, double cur)
{
    if (prev == cur) {
        return 0.0;
    }
    return (cur - prev) / std::max(std::abs(prev), std::numeric_limits<double>::min());
}

// Fold-in EM from `theta` (updated in place) against fixed topic-word rows.
// Returns the log-likelihood of the document at the returned theta, smoothed
// by `epsilon`.
double fold_in_em(const Matrix& topic_word, SparseDoc doc, std::vector<double>& theta, double tol,
                  std::size_t max_iterations, double epsilon)
{
    const std::size_t k_topics = topic_word.rows();
    std::vector<double> next(k_topics);

    auto loglik = [&](const std::vector<double>& t) {
        double ll = 0.0;
        for (const auto& e : doc) {
            double p = 0.0;
            for (std::size_t k = 0; k < k_topics; ++k) {
                p += t[k] * topic_word(k, e.term);
            }
            if (p + epsilon > 0.0) {
                ll += e.count * std::log(p + epsilon);
            }
        }
        return ll;
    };

    double prev = loglik(theta);
    for (std::size_t it = 0; it < max_iterations; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        double mass = 0.0;
        for (const auto& e : doc) {
            double p = 0.0;
            for (std::size_t k = 0; k < k_topics; ++k) {
                p += theta[k] * topic_word(k, e.term);
            }
            if (p <= 0.0) {
                continue;
            }
            for (std::size_t k = 0; k < k_topics; ++k) {
                next[k] += e.count * theta[k] * topic_word(k, e.term) / p;
            }
            mass += e.count;
        }
        if (mass == 0.0) {
            std::fill(theta.begin(), theta.end(), 1.0 / static_cast<double>(k_topics));
            return loglik(theta);
        }
        for (std::size_t k = 0; k < k_topics; ++k) {
            theta[k] = next[k] / mass;
        }
        const double cur = loglik(theta);
        const double gain = relative_gain(prev, cur);
        prev = cur;
        if (gain < tol) {
            break;
        }
    }
    return prev;
}

} // namespace

void PlsaConfig::validate() const
{
    if (num_topics < 1) {
        throw std::invalid_argument("PLSA needs K >= 1");
    }
    if (!(tol > 0.0)) {
        throw std::invalid_argument("PLSA tol must be positive");
    }
    if (!(early_stop_fraction >= 0.0 && early_stop_fraction < 0.5)) {
        throw std::invalid_argument("PLSA early_stop_fraction must lie in [0, 0.5)");
    }
    if (max_iterations < 1) {
        throw std::invalid_argument("PLSA max_iterations must be at least 1");
    }
}

double plsa_log_likelihood(const DocTermMatrix& matrix, const PlsaParams& params)
{
    const std::size_t k_topics = params.p_w_given_z.rows();
    double ll = 0.0;
    for (std::size_t d = 0; d < matrix.n_docs(); ++d) {
        const auto theta = params.p_z_given_d.row(d);
        for (const auto& e : matrix.row(d)) {
            double p = 0.0;
            for (std::size_t k = 0; k < k_topics; ++k) {
                p += theta[k] * params.p_w_given_z(k, e.term);
            }
            ll += e.count * std::log(p);
        }
    }
    return ll;
}

PlsaParams plsa_em_step(const DocTermMatrix& matrix, const PlsaParams& params)
{
    const std::size_t k_topics = params.p_w_given_z.rows();
    const std::size_t v = params.p_w_given_z.cols();
    PlsaParams next{Matrix(k_topics, v), Matrix(matrix.n_docs(), k_topics)};
    std::vector<double> resp(k_topics);

    for (std::size_t d = 0; d < matrix.n_docs(); ++d) {
        const auto theta = params.p_z_given_d.row(d);
        auto theta_next = next.p_z_given_d.row(d);
        double doc_mass = 0.0;
        for (const auto& e : matrix.row(d)) {
            // E-step: p(z|d,w) proportional to p(z|d) p(w|z).
            double total = 0.0;
            for (std::size_t k = 0; k < k_topics; ++k) {
                resp[k] = theta[k] * params.p_w_given_z(k, e.term);
                total += resp[k];
            }
            if (total <= 0.0) {
                continue;
            }
            const double scale = e.count / total;
            for (std::size_t k = 0; k < k_topics; ++k) {
                const double weighted = resp[k] * scale;
                next.p_w_given_z(k, e.term) += weighted;
                theta_next[k] += weighted;
            }
            doc_mass += e.count;
        }
        if (doc_mass > 0.0) {
            for (auto& x : theta_next) {
                x /= doc_mass;
            }
        } else {
            std::copy(theta.begin(), theta.end(), theta_next.begin());
        }
    }

    for (std::size_t k = 0; k < k_topics; ++k) {
        auto row = next.p_w_given_z.row(k);
        const double sum = std::accumulate(row.begin(), row.end(), 0.0);
        if (sum > 0.0) {
            for (auto& x : row) {
                x /= sum;
            }
        } else {
            const auto old = params.p_w_given_z.row(k);
            std::copy(old.begin(), old.end(), row.begin());
        }
    }
    return next;
}

TopicModel fit_plsa(const DocTermMatrix& matrix, const PlsaConfig& config,
                    const EmObserver& observer)
{
    config.validate();
    if (matrix.empty() || matrix.total_mass() == 0) {
        throw std::invalid_argument("PLSA needs a non-empty document-term matrix");
    }
    const std::size_t k_topics = config.num_topics;
    const std::size_t n = matrix.n_docs();

    // Validation documents for early stopping.
    std::size_t n_val = static_cast<std::size_t>(config.early_stop_fraction * static_cast<double>(n));
    n_val = std::min(n_val, n - 1);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (n_val > 0) {
        Rng split_rng(mix_seed(config.seed, 1));
        split_rng.shuffle(std::span<std::size_t>(order));
    }
    std::vector<std::size_t> val_pos(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<std::size_t> fit_pos(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
    std::sort(val_pos.begin(), val_pos.end());
    std::sort(fit_pos.begin(), fit_pos.end());
    const DocTermMatrix fit_matrix = n_val > 0 ? matrix.select_rows(fit_pos) : matrix;

    Rng rng(config.seed);
    PlsaParams params;
    params.p_w_given_z = random_stochastic(k_topics, matrix.n_terms(), rng);
    params.p_z_given_d = random_stochastic(fit_matrix.n_docs(), k_topics, rng);

    std::vector<std::vector<double>> val_theta(
        n_val, std::vector<double>(k_topics, 1.0 / static_cast<double>(k_topics)));
    auto validation_loglik = [&](const Matrix& topic_word) {
        double ll = 0.0;
        for (std::size_t i = 0; i < n_val; ++i) {
            ll += fold_in_em(topic_word, matrix.row(val_pos[i]), val_theta[i], config.tol,
                             config.fold_in_max_iterations, kValidationEpsilon);
        }
        return ll;
    };

    FitMeta meta;
    meta.seed = config.seed;
    double ll = plsa_log_likelihood(fit_matrix, params);
    meta.objective_trace.push_back(ll);
    double val_ll = n_val > 0 ? validation_loglik(params.p_w_given_z)
                              : -std::numeric_limits<double>::infinity();

    for (std::size_t it = 1; it <= config.max_iterations; ++it) {
        PlsaParams next = plsa_em_step(fit_matrix, params);
        const double next_ll = plsa_log_likelihood(fit_matrix, next);
        if (n_val > 0) {
            const double next_val = validation_loglik(next.p_w_given_z);
            if (next_val < val_ll) {
                meta.warnings.push_back("early stop at iteration " + std::to_string(it) +
                                        ": validation log-likelihood decreased");
                break;
            }
            val_ll = next_val;
        }
        const double gain = relative_gain(ll, next_ll);
        params = std::move(next);
        ll = next_ll;
        meta.objective_trace.push_back(ll);
        meta.iterations = it;
        if (observer) {
            observer(it, params, ll);
        }
        if (gain < config.tol) {
            break;
        }
    }
    meta.objective = ll;

    TopicModel model;
    model.kind = ModelKind::Plsa;
    model.vocab = matrix.vocabulary_ptr();
    model.topic_word = params.p_w_given_z;
    model.doc_topic = Matrix(n, k_topics);
    for (std::size_t i = 0; i < fit_pos.size(); ++i) {
        const auto src = params.p_z_given_d.row(i);
        std::copy(src.begin(), src.end(), model.doc_topic.row(fit_pos[i]).begin());
    }
    model.meta = std::move(meta);
    for (std::size_t i = 0; i < n_val; ++i) {
        const auto theta = plsa_fold_in(model, matrix.row(val_pos[i]), config);
        std::copy(theta.begin(), theta.end(), model.doc_topic.row(val_pos[i]).begin());
    }
    return model;
}

std::vector<double> plsa_fold_in(const TopicModel& model, SparseDoc doc, const PlsaConfig& config)
{
    if (model.kind != ModelKind::Plsa) {
        throw std::invalid_argument("plsa_fold_in needs a PLSA model");
    }
    const std::size_t k_topics = model.num_topics();
    std::vector<double> theta(k_topics, 1.0 / static_cast<double>(k_topics));
    for (const auto& e : doc) {
        if (e.term >= model.vocab_size()) {
            throw std::invalid_argument("held-out term id outside model vocabulary");
        }
    }
    if (doc.empty() || k_topics == 1) {
        return theta;
    }
    fold_in_em(model.topic_word, doc, theta, config.tol, config.fold_in_max_iterations, 0.0);
    return theta;
}

} // namespace topicforge
