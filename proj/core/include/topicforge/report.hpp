#pragma once

#include "topicforge/eval_metrics.hpp"
#include "topicforge/model_api.hpp"
#include "topicforge/pipeline_config.hpp"
#include "topicforge/textprep.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace topicforge {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitEmptyCorpus = 3;
inline constexpr int kExitModelFailure = 4;

/// Pipeline failure carrying the process exit code.
class PipelineError : public std::runtime_error
{
public:
    PipelineError(int exit_code, const std::string& what)
        : std::runtime_error(what), exit_code_(exit_code)
    {}

    int exit_code() const noexcept { return exit_code_; }

private:
    int exit_code_;
};

/// Scores and topics of the model chosen for one model kind.
struct EvalReport
{
    ModelKind kind = ModelKind::Lda;
    std::size_t selected_k = 0;
    double coherence_umass = 0.0;
    double coherence_npmi = 0.0;
    double perplexity = 0.0;
    std::vector<TopicTermRanking> topics;
    std::vector<std::string> warnings;
};

struct RunManifest
{
    std::string tool_version;
    std::string config_hash;
    std::map<std::string, std::string> config;
    std::uint64_t seed = 0;
    std::size_t records_read = 0;
    std::size_t records_in_category = 0;
    std::size_t docs_preprocessed = 0;
    std::size_t docs_in_matrix = 0;
    std::size_t vocab_size = 0;
    std::size_t train_docs = 0;
    std::size_t test_docs = 0;
    /// Stage name -> seconds; all zero in reproducible mode.
    std::map<std::string, double> timings;
};

struct ReportBundle
{
    std::vector<EvalReport> reports;
    std::vector<SweepRow> sweep;
    std::vector<Exclusion> excluded;
    RunManifest manifest;
    /// Selected models, parallel to reports. Not part of bundle.json.
    std::vector<TopicModel> models;
};

/// Runs ingest, filtering, preprocessing, matrix building, the K sweep for
/// every configured model and report assembly. Writes all outputs into
/// config.out_dir(). Throws PipelineError with the matching exit code.
ReportBundle run_pipeline(const PipelineConfig& config);

/// Writes every report file for `bundle` into `dir` (created if missing).
void write_outputs(const ReportBundle& bundle, const std::filesystem::path& dir,
                   std::size_t wordcloud_n, bool reproducible);

/// Reports in table order: PLSA, NMF, LDA.
std::vector<const EvalReport*> comparison_order(const ReportBundle& bundle);

/// Union of each topic's top-3 terms in topic then rank order, deduplicated.
std::vector<std::string> comparison_top_words(const EvalReport& report);

/// One row per model: model, K, top words, both coherences, perplexity.
void emit_comparison_table(const ReportBundle& bundle, std::ostream& text, std::ostream& csv);

/// `term,weight` rows for the top-n terms of one topic.
void emit_wordcloud_freqs(const TopicModel& model, std::size_t topic_id, std::size_t n,
                          std::ostream& out);

/// Per-topic `topic_id,rank,term,weight` rows.
void emit_topic_table(const EvalReport& report, std::ostream& out);

void write_manifest(std::ostream& out, const RunManifest& manifest);
void write_excluded_log(std::ostream& out, const std::vector<Exclusion>& excluded);

/// bundle.json round trip (models are not included).
void write_bundle(std::ostream& out, const ReportBundle& bundle);
ReportBundle read_bundle(std::istream& in);
ReportBundle load_bundle(const std::filesystem::path& dir);

} // namespace topicforge
