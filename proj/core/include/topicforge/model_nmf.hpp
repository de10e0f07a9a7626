#pragma once

#include "topicforge/model_api.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace topicforge {

enum class NmfObjective { Frobenius };

struct NmfConfig
{
    std::size_t num_topics = 10;
    std::size_t max_iterations = 500;
    /// Stop when the relative decrease of the objective drops below tol.
    double tol = 1e-4;
    std::uint64_t seed = 0;
    NmfObjective objective = NmfObjective::Frobenius;

    void validate() const;
};

struct NmfFactors
{
    Matrix W; // n_docs x K
    Matrix H; // K x n_terms
    /// ||V - WH||_F^2 at initialization, then after every iteration.
    std::vector<double> objective_trace;
    std::vector<std::string> warnings;
    std::size_t iterations = 0;
    std::uint64_t seed = 0;
};

/// Denominator floor in the multiplicative updates.
inline constexpr double kNmfDenominatorFloor = 1e-12;

/// Called after every iteration with the updated factors and objective.
using NmfObserver =
    std::function<void(std::size_t iteration, const Matrix& W, const Matrix& H, double objective)>;

/// Lee-Seung multiplicative updates for ||V - WH||_F^2 over the raw counts,
/// from a seeded uniform initialization. Records a warning when
/// K > min(n_docs, n_terms).
NmfFactors fit_nmf(const DocTermMatrix& matrix, const NmfConfig& config,
                   const NmfObserver& observer = {});

/// ||V - WH||_F^2. Exact entrywise sum for small matrices, otherwise the
/// expansion ||V||^2 - 2<V, WH> + <W'W, HH'>.
double frobenius_objective(const DocTermMatrix& matrix, const Matrix& W, const Matrix& H);

/// topic_word[k] = H[k] / sum(H[k]); doc_topic[d] proportional to
/// W[d][k] * sum(H[k]). Zero rows become uniform and are noted in meta.warnings.
TopicModel nmf_to_topic_model(const NmfFactors& factors, std::shared_ptr<const Vocabulary> vocab);

/// Non-negative least squares for one unseen document against the fixed,
/// normalized topic rows (multiplicative updates), normalized to a
/// distribution. `gram` may carry a precomputed topic_word * topic_word'.
std::vector<double> nmf_fold_in(const TopicModel& model, SparseDoc doc, const NmfConfig& config,
                                const Matrix* gram = nullptr);

/// topic_word * topic_word', K x K.
Matrix topic_gram(const TopicModel& model);

} // namespace topicforge
