#pragma once

#include "topicforge/model_api.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace topicforge {

struct PlsaConfig
{
    std::size_t num_topics = 10;
    std::size_t max_iterations = 500;
    /// Stop when the relative training log-likelihood gain drops below tol.
    double tol = 1e-6;
    std::uint64_t seed = 0;
    /// Share of training documents held back to detect overfitting; EM stops
    /// (and keeps the previous parameters) once their fold-in log-likelihood
    /// decreases. 0 disables the check.
    double early_stop_fraction = 0.1;
    std::size_t fold_in_max_iterations = 200;

    void validate() const;
};

struct PlsaParams
{
    Matrix p_w_given_z; // K x V
    Matrix p_z_given_d; // D x K
};

/// sum_{d,w} n(d,w) log sum_z p(z|d) p(w|z). Pairs with zero model
/// probability contribute log(0) = -inf.
double plsa_log_likelihood(const DocTermMatrix& matrix, const PlsaParams& params);

/// One E-step plus M-step. Topics that receive no mass keep their old row.
PlsaParams plsa_em_step(const DocTermMatrix& matrix, const PlsaParams& params);

/// Called after each accepted EM iteration with the training log-likelihood.
using EmObserver =
    std::function<void(std::size_t iteration, const PlsaParams& params, double log_likelihood)>;

/// meta.objective_trace holds the training log-likelihood of the initial
/// parameters followed by one entry per accepted iteration.
TopicModel fit_plsa(const DocTermMatrix& matrix, const PlsaConfig& config,
                    const EmObserver& observer = {});

/// EM over p(z|d_new) only, from a uniform start, with p(w|z) frozen. Terms
/// with zero probability under every topic are ignored; a document with no
/// usable terms gets the uniform distribution.
std::vector<double> plsa_fold_in(const TopicModel& model, SparseDoc doc, const PlsaConfig& config);

} // namespace topicforge
