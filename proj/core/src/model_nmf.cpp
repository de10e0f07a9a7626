#include "topicforge/model_nmf.hpp"

#include "topicforge/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace topicforge {

namespace {

constexpr std::size_t kExactObjectiveLimit = std::size_t{1} << 20;

// Gram matrix A * A' for a row-major K x m matrix.
Matrix row_gram(const Matrix& a)
{
    const std::size_t k = a.rows();
    Matrix g(k, k);
    for (std::size_t i = 0; i < k; ++i) {
        const auto ri = a.row(i);
        for (std::size_t j = i; j < k; ++j) {
            const auto rj = a.row(j);
            double s = 0.0;
            for (std::size_t c = 0; c < ri.size(); ++c) {
                s += ri[c] * rj[c];
            }
            g(i, j) = s;
            g(j, i) = s;
        }
    }
    return g;
}

// W' * W for a row-major n x K matrix.
Matrix col_gram(const Matrix& w)
{
    const std::size_t k = w.cols();
    Matrix g(k, k);
    for (std::size_t d = 0; d < w.rows(); ++d) {
        const auto r = w.row(d);
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = i; j < k; ++j) {
                g(i, j) += r[i] * r[j];
            }
        }
    }
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            g(i, j) = g(j, i);
        }
    }
    return g;
}

void update_h(const DocTermMatrix& v, const Matrix& w, Matrix& h)
{
    const std::size_t k_topics = h.rows();
    Matrix numer(k_topics, h.cols());
    for (std::size_t d = 0; d < v.n_docs(); ++d) {
        const auto wd = w.row(d);
        for (const auto& e : v.row(d)) {
            for (std::size_t k = 0; k < k_topics; ++k) {
                numer(k, e.term) += wd[k] * e.count;
            }
        }
    }
    const Matrix wtw = col_gram(w);
    std::vector<double> denom(h.cols());
    for (std::size_t k = 0; k < k_topics; ++k) {
        std::fill(denom.begin(), denom.end(), 0.0);
        for (std::size_t l = 0; l < k_topics; ++l) {
            const double g = wtw(k, l);
            const auto hl = h.row(l);
            for (std::size_t t = 0; t < denom.size(); ++t) {
                denom[t] += g * hl[t];
            }
        }
        auto hk = h.row(k);
        for (std::size_t t = 0; t < hk.size(); ++t) {
            hk[t] *= numer(k, t) / (denom[t] + kNmfDenominatorFloor);
        }
    }
}

void update_w(const DocTermMatrix& v, Matrix& w, const Matrix& h)
{
    const std::size_t k_topics = h.rows();
    const Matrix hht = row_gram(h);
    std::vector<double> numer(k_topics);
    for (std::size_t d = 0; d < v.n_docs(); ++d) {
        std::fill(numer.begin(), numer.end(), 0.0);
        for (const auto& e : v.row(d)) {
            for (std::size_t k = 0; k < k_topics; ++k) {
                numer[k] += e.count * h(k, e.term);
            }
        }
        auto wd = w.row(d);
        std::vector<double> old(wd.begin(), wd.end());
        for (std::size_t k = 0; k < k_topics; ++k) {
            double denom = 0.0;
            for (std::size_t l = 0; l < k_topics; ++l) {
                denom += old[l] * hht(l, k);
            }
            wd[k] = old[k] * numer[k] / (denom + kNmfDenominatorFloor);
        }
    }
}

void normalize_or_uniform(std::span<double> row)
{
    const double sum = std::accumulate(row.begin(), row.end(), 0.0);
    if (sum > 0.0) {
        for (auto& x : row) {
            x /= sum;
        }
    } else {
        std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(row.size()));
    }
}

} // namespace

void NmfConfig::validate() const
{
    if (num_topics < 1) {
        throw std::invalid_argument("NMF needs K >= 1");
    }
    if (!(tol > 0.0)) {
        throw std::invalid_argument("NMF tol must be positive");
    }
    if (max_iterations < 1) {
        throw std::invalid_argument("NMF max_iterations must be at least 1");
    }
}

double frobenius_objective(const DocTermMatrix& matrix, const Matrix& W, const Matrix& H)
{
    const std::size_t n = matrix.n_docs();
    const std::size_t m = matrix.n_terms();
    const std::size_t k_topics = H.rows();

    if (n * m <= kExactObjectiveLimit) {
        double total = 0.0;
        std::vector<double> dense(m);
        for (std::size_t d = 0; d < n; ++d) {
            std::fill(dense.begin(), dense.end(), 0.0);
            for (const auto& e : matrix.row(d)) {
                dense[e.term] = e.count;
            }
            const auto wd = W.row(d);
            for (std::size_t t = 0; t < m; ++t) {
                double approx = 0.0;
                for (std::size_t k = 0; k < k_topics; ++k) {
                    approx += wd[k] * H(k, t);
                }
                const double r = dense[t] - approx;
                total += r * r;
            }
        }
        return total;
    }

    double v_norm = 0.0;
    double cross = 0.0;
    for (std::size_t d = 0; d < n; ++d) {
        const auto wd = W.row(d);
        for (const auto& e : matrix.row(d)) {
            const double c = e.count;
            v_norm += c * c;
            double approx = 0.0;
            for (std::size_t k = 0; k < k_topics; ++k) {
                approx += wd[k] * H(k, e.term);
            }
            cross += c * approx;
        }
    }
    const Matrix wtw = col_gram(W);
    const Matrix hht = row_gram(H);
    double quad = 0.0;
    for (std::size_t i = 0; i < k_topics; ++i) {
        for (std::size_t j = 0; j < k_topics; ++j) {
            quad += wtw(i, j) * hht(i, j);
        }
    }
    return std::max(0.0, v_norm - 2.0 * cross + quad);
}

NmfFactors fit_nmf(const DocTermMatrix& matrix, const NmfConfig& config, const NmfObserver& observer)
{
    config.validate();
    if (matrix.empty() || matrix.total_mass() == 0) {
        throw std::invalid_argument("NMF needs a non-empty document-term matrix");
    }
    const std::size_t n = matrix.n_docs();
    const std::size_t m = matrix.n_terms();
    const std::size_t k_topics = config.num_topics;

    NmfFactors f;
    f.seed = config.seed;
    if (k_topics > std::min(n, m)) {
        f.warnings.push_back("K = " + std::to_string(k_topics) + " exceeds min(n_docs, n_terms) = " +
                             std::to_string(std::min(n, m)));
    }

    double v_norm = 0.0;
    for (std::size_t d = 0; d < n; ++d) {
        for (const auto& e : matrix.row(d)) {
            v_norm += static_cast<double>(e.count) * e.count;
        }
    }
    const double mean = static_cast<double>(matrix.total_mass()) / static_cast<double>(n * m);
    const double scale = std::sqrt(mean / static_cast<double>(k_topics));

    Rng rng(config.seed);
    f.W = Matrix(n, k_topics);
    f.H = Matrix(k_topics, m);
    for (auto& x : f.W.values()) {
        x = scale * rng.uniform_positive();
    }
    for (auto& x : f.H.values()) {
        x = scale * rng.uniform_positive();
    }

    // Below this the residual is at rounding level and further updates only add noise.
    const double exact_floor = 1e-24 * v_norm;

    double prev = frobenius_objective(matrix, f.W, f.H);
    f.objective_trace.push_back(prev);
    for (std::size_t it = 1; it <= config.max_iterations; ++it) {
        update_h(matrix, f.W, f.H);
        update_w(matrix, f.W, f.H);
        const double obj = frobenius_objective(matrix, f.W, f.H);
        f.objective_trace.push_back(obj);
        f.iterations = it;
        if (observer) {
            observer(it, f.W, f.H, obj);
        }
        if (obj <= exact_floor || (prev - obj) / prev < config.tol) {
            break;
        }
        prev = obj;
    }
    return f;
}

TopicModel nmf_to_topic_model(const NmfFactors& factors, std::shared_ptr<const Vocabulary> vocab)
{
    const std::size_t k_topics = factors.H.rows();
    TopicModel model;
    model.kind = ModelKind::Nmf;
    model.vocab = std::move(vocab);
    model.topic_word = factors.H;
    model.doc_topic = factors.W;
    model.meta.iterations = factors.iterations;
    model.meta.seed = factors.seed;
    model.meta.objective_trace = factors.objective_trace;
    model.meta.objective = factors.objective_trace.empty() ? 0.0 : factors.objective_trace.back();
    model.meta.warnings = factors.warnings;

    std::vector<double> mass(k_topics);
    for (std::size_t k = 0; k < k_topics; ++k) {
        auto row = model.topic_word.row(k);
        mass[k] = std::accumulate(row.begin(), row.end(), 0.0);
        if (mass[k] <= 0.0) {
            model.meta.warnings.push_back("topic " + std::to_string(k) +
                                          " has an all-zero H row; using a uniform distribution");
        }
        normalize_or_uniform(row);
    }
    std::size_t zero_docs = 0;
    for (std::size_t d = 0; d < model.doc_topic.rows(); ++d) {
        auto row = model.doc_topic.row(d);
        for (std::size_t k = 0; k < k_topics; ++k) {
            row[k] *= mass[k];
        }
        if (std::accumulate(row.begin(), row.end(), 0.0) <= 0.0) {
            ++zero_docs;
        }
        normalize_or_uniform(row);
    }
    if (zero_docs > 0) {
        model.meta.warnings.push_back(std::to_string(zero_docs) +
                                      " document(s) with all-zero loadings set to uniform");
    }
    return model;
}

Matrix topic_gram(const TopicModel& model) { return row_gram(model.topic_word); }

std::vector<double> nmf_fold_in(const TopicModel& model, SparseDoc doc, const NmfConfig& config,
                                const Matrix* gram)
{
    if (model.kind != ModelKind::Nmf) {
        throw std::invalid_argument("nmf_fold_in needs an NMF model");
    }
    const std::size_t k_topics = model.num_topics();
    std::vector<double> u(k_topics, 1.0 / static_cast<double>(k_topics));
    if (doc.empty()) {
        return u;
    }
    Matrix local;
    if (!gram) {
        local = topic_gram(model);
        gram = &local;
    }

    std::vector<double> numer(k_topics, 0.0);
    double mass = 0.0;
    double v_norm = 0.0;
    for (const auto& e : doc) {
        if (e.term >= model.vocab_size()) {
            throw std::invalid_argument("held-out term id outside model vocabulary");
        }
        for (std::size_t k = 0; k < k_topics; ++k) {
            numer[k] += e.count * model.topic_word(k, e.term);
        }
        mass += e.count;
        v_norm += static_cast<double>(e.count) * e.count;
    }
    for (auto& x : u) {
        x = mass / static_cast<double>(k_topics);
    }

    // ||v - uT||^2 = ||v||^2 - 2 u.numer + u'Gu
    auto objective = [&](const std::vector<double>& x) {
        double lin = 0.0;
        double quad = 0.0;
        for (std::size_t i = 0; i < k_topics; ++i) {
            lin += x[i] * numer[i];
            for (std::size_t j = 0; j < k_topics; ++j) {
                quad += x[i] * (*gram)(i, j) * x[j];
            }
        }
        return v_norm - 2.0 * lin + quad;
    };

    std::vector<double> old(k_topics);
    double prev = objective(u);
    for (std::size_t it = 0; it < config.max_iterations; ++it) {
        old = u;
        for (std::size_t k = 0; k < k_topics; ++k) {
            double denom = 0.0;
            for (std::size_t l = 0; l < k_topics; ++l) {
                denom += (*gram)(k, l) * old[l];
            }
            u[k] = old[k] * numer[k] / (denom + kNmfDenominatorFloor);
        }
        const double obj = objective(u);
        if (prev <= 0.0 || (prev - obj) / prev < config.tol) {
            break;
        }
        prev = obj;
    }
    normalize_or_uniform(u);
    return u;
}

} // namespace topicforge
