#pragma once

#include "topicforge/model_api.hpp"
#include "topicforge/model_lda.hpp"
#include "topicforge/model_nmf.hpp"
#include "topicforge/model_plsa.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace topicforge {

struct PerplexityResult
{
    double value = 0.0;
    std::size_t heldout_docs = 0;
    std::size_t heldout_tokens = 0;
    double smoothing_epsilon = 0.0;
};

/// Held-out inference: topic mixture for one unseen document. `position` is
/// the row index inside the held-out matrix (used to derive per-document seeds).
using FoldIn =
    std::function<std::vector<double>(const TopicModel& model, SparseDoc doc, std::size_t position)>;

/// A held-out word has zero predictive probability and no smoothing was requested.
class ZeroProbabilityError : public std::runtime_error
{
public:
    ZeroProbabilityError(std::size_t doc_id, std::string term)
        : std::runtime_error("held-out document " + std::to_string(doc_id) + ": word '" + term +
                             "' has zero probability under the model"),
          doc_id_(doc_id), term_(std::move(term))
    {}

    std::size_t doc_id() const noexcept { return doc_id_; }
    const std::string& term() const noexcept { return term_; }

private:
    std::size_t doc_id_;
    std::string term_;
};

/// exp(-sum_d log p(D_d) / sum_d N_d) with natural logs, where
/// log p(D_d) = sum_w n(d,w) log(p(w|d) + epsilon) and p(w|d) comes from the
/// fold-in mixture. Throws std::invalid_argument("no test documents") on an
/// empty held-out set.
PerplexityResult perplexity(const TopicModel& model, const DocTermMatrix& heldout,
                            const FoldIn& fold_in, double epsilon = 1e-12);

enum class CoherenceVariant { UMass, Npmi };

std::string_view to_string(CoherenceVariant variant);
std::optional<CoherenceVariant> parse_coherence_variant(std::string_view name);

struct CoherenceResult
{
    /// UMass: sum over ranked pairs. NPMI: mean over pairs.
    std::vector<double> per_topic;
    /// per_topic divided by the number of pairs (equal to per_topic for NPMI).
    std::vector<double> per_topic_normalized;
    double mean = 0.0;
    CoherenceVariant variant = CoherenceVariant::Npmi;
    std::size_t top_n = 0;
    std::vector<std::string> warnings;
};

/// Score for one ranked word list (most probable first).
/// UMass: sum_{i>=1} sum_{j<i} ln((D(w_i, w_j) + 1) / D(w_j)).
double umass_score(std::span<const TermId> ranked, const CooccurrenceStats& stats);
/// Mean NPMI over unordered pairs. Pairs that never co-occur score -1; a pair
/// present in every document scores 0.
double npmi_score(std::span<const TermId> ranked, const CooccurrenceStats& stats);
double npmi_pair(TermId a, TermId b, const CooccurrenceStats& stats);

/// With top_n = 1 every topic scores 0 and a warning is recorded.
CoherenceResult coherence(const TopicModel& model, const CooccurrenceStats& stats,
                          std::size_t top_n = 10, CoherenceVariant variant = CoherenceVariant::Npmi);

struct ModelConfigs
{
    LdaConfig lda;
    PlsaConfig plsa;
    NmfConfig nmf;
};

/// Fits one model of the given kind with K overriding the configured topic count.
TopicModel fit_topic_model(ModelKind kind, const DocTermMatrix& train, const ModelConfigs& configs,
                           std::size_t num_topics);

/// The held-out inference procedure matching model.kind.
FoldIn make_fold_in(const TopicModel& model, const ModelConfigs& configs);

struct SweepRow
{
    ModelKind kind = ModelKind::Lda;
    std::size_t num_topics = 0;
    double coherence_umass = 0.0;
    double coherence_npmi = 0.0;
    double perplexity = 0.0;
    double fit_seconds = 0.0;

    double coherence_mean(CoherenceVariant variant) const
    {
        return variant == CoherenceVariant::UMass ? coherence_umass : coherence_npmi;
    }
};

struct SweepOptions
{
    std::size_t top_n = 10;
    /// Coherence variant used to pick K.
    CoherenceVariant selection = CoherenceVariant::Npmi;
    double epsilon = 1e-12;
    /// Worker threads for independent K fits; results do not depend on it.
    std::size_t threads = 1;
};

struct SweepResult
{
    std::vector<SweepRow> rows;
    /// Fitted models, parallel to rows.
    std::vector<TopicModel> models;
    std::size_t selected_k = 0;
};

/// A fit or evaluation failed for a model kind at a given K.
class ModelFitError : public std::runtime_error
{
public:
    ModelFitError(ModelKind kind, std::size_t k, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + " with K = " + std::to_string(k) +
                             ": " + what),
          kind_(kind), k_(k)
    {}

    ModelKind kind() const noexcept { return kind_; }
    std::size_t num_topics() const noexcept { return k_; }

private:
    ModelKind kind_;
    std::size_t k_;
};

/// argmax of the selection coherence, ties to the smaller K.
std::size_t select_topic_count(std::span<const SweepRow> rows, CoherenceVariant variant);

/// Fits on split.train for every K, scores coherence against `stats` and
/// perplexity on split.test. Rows come back in the order of `ks`.
SweepResult sweep_topic_count(const CorpusSplit& split, const CooccurrenceStats& stats,
                              std::span<const std::size_t> ks, ModelKind kind,
                              const ModelConfigs& configs, const SweepOptions& options = {});

/// Header `model,K,coherence_umass,coherence_npmi,perplexity,fit_seconds`.
/// With `mask_timings` fit_seconds is written as 0 so output is byte-stable.
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows, bool mask_timings);

} // namespace topicforge
