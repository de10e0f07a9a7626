#include "topicforge/report.hpp"

#include "topicforge/dtm.hpp"
#include "topicforge/errors.hpp"
#include "topicforge/ingest.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#ifndef TOPICFORGE_VERSION
#define TOPICFORGE_VERSION "0.0.0"
#endif

namespace topicforge {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt(const char* pattern, double value)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), pattern, value);
    return buf;
}

std::string lower_name(ModelKind kind)
{
    std::string name(to_string(kind));
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return name;
}

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw PipelineError(kExitInputError, "cannot write '" + path.string() + "'");
    }
    return out;
}

class StageTimer
{
public:
    explicit StageTimer(std::map<std::string, double>& sink) : sink_(sink) {}

    template <typename F>
    auto run(const std::string& stage, F&& f)
    {
        const auto start = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            record(stage, start);
        } else {
            auto result = f();
            record(stage, start);
            return result;
        }
    }

private:
    void record(const std::string& stage, std::chrono::steady_clock::time_point start)
    {
        sink_[stage] += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }

    std::map<std::string, double>& sink_;
};

ExclusionReason parse_reason(const std::string& name)
{
    for (auto r : {ExclusionReason::EmptyNarrative, ExclusionReason::BelowMinTokens,
                   ExclusionReason::VocabularyEmpty}) {
        if (to_string(r) == name) {
            return r;
        }
    }
    throw ParseError(0, "unknown exclusion reason '" + name + "'");
}

ordered_json manifest_json(const RunManifest& m)
{
    ordered_json j;
    j["tool_version"] = m.tool_version;
    j["config_hash"] = m.config_hash;
    j["seed"] = m.seed;
    j["config"] = m.config;
    j["records_read"] = m.records_read;
    j["records_in_category"] = m.records_in_category;
    j["docs_preprocessed"] = m.docs_preprocessed;
    j["docs_in_matrix"] = m.docs_in_matrix;
    j["vocab_size"] = m.vocab_size;
    j["train_docs"] = m.train_docs;
    j["test_docs"] = m.test_docs;
    j["timings"] = m.timings;
    return j;
}

RunManifest manifest_from_json(const ordered_json& j)
{
    RunManifest m;
    m.tool_version = j.at("tool_version").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config = j.at("config").get<std::map<std::string, std::string>>();
    m.records_read = j.at("records_read").get<std::size_t>();
    m.records_in_category = j.at("records_in_category").get<std::size_t>();
    m.docs_preprocessed = j.at("docs_preprocessed").get<std::size_t>();
    m.docs_in_matrix = j.at("docs_in_matrix").get<std::size_t>();
    m.vocab_size = j.at("vocab_size").get<std::size_t>();
    m.train_docs = j.at("train_docs").get<std::size_t>();
    m.test_docs = j.at("test_docs").get<std::size_t>();
    m.timings = j.at("timings").get<std::map<std::string, double>>();
    return m;
}

ModelKind kind_from_json(const ordered_json& j)
{
    const auto name = j.get<std::string>();
    const auto kind = parse_model_kind(name);
    if (!kind) {
        throw ParseError(0, "unknown model kind '" + name + "'");
    }
    return *kind;
}

} // namespace

ReportBundle run_pipeline(const PipelineConfig& config)
{
    try {
        config.validate();
    } catch (const ConfigError& e) {
        throw PipelineError(kExitInputError, e.what());
    }

    ReportBundle bundle;
    auto& manifest = bundle.manifest;
    StageTimer timer(manifest.timings);
    const bool reproducible = config.reproducible();
    const auto seed = config.seed();

    manifest.tool_version = TOPICFORGE_VERSION;
    manifest.config_hash = config.hash();
    manifest.seed = seed;
    for (const auto& [k, v] : config.values()) {
        manifest.config.emplace(k, v);
    }

    std::vector<AccidentRecord> records;
    StopwordList stoplist;
    LemmaLexicon lexicon;
    try {
        records = timer.run("ingest", [&] {
            std::ifstream in(config.input_path(), std::ios::binary);
            if (!in) {
                throw ConfigError("cannot open input '" + config.input_path().string() + "'");
            }
            auto parsed = parse_records(in, config.column_map());
            categorize_records(parsed, config.category_rules());
            return parsed;
        });
        stoplist = config.stoplist();
        lexicon = config.lexicon();
    } catch (const ConfigError& e) {
        throw PipelineError(kExitInputError, e.what());
    } catch (const ParseError& e) {
        throw PipelineError(kExitInputError, config.input_path().string() + ": " + e.what());
    }
    manifest.records_read = records.size();

    if (const auto category = config.category()) {
        std::erase_if(records, [&](const AccidentRecord& r) { return r.category != *category; });
    }
    manifest.records_in_category = records.size();

    auto docs = timer.run("preprocess", [&] {
        return preprocess_corpus(records, stoplist, lexicon, config.min_tokens(), &bundle.excluded);
    });
    manifest.docs_preprocessed = docs.size();
    if (docs.empty()) {
        throw PipelineError(kExitEmptyCorpus, "empty corpus after preprocessing");
    }

    DocTermMatrix matrix;
    CorpusSplit split;
    CooccurrenceStats stats;
    timer.run("dtm", [&] {
        std::shared_ptr<const Vocabulary> vocab;
        try {
            vocab = std::make_shared<const Vocabulary>(
                build_vocabulary(docs, config.min_df(), config.max_df()));
        } catch (const EmptyVocabularyError& e) {
            throw PipelineError(kExitEmptyCorpus, std::string("empty corpus: ") + e.what());
        }
        matrix = build_matrix(docs, vocab);
        for (auto id : matrix.excluded_ids()) {
            bundle.excluded.push_back({id, ExclusionReason::VocabularyEmpty});
        }
        if (matrix.empty()) {
            throw PipelineError(kExitEmptyCorpus, "empty corpus: no document has a vocabulary term");
        }
        split = split_train_test(matrix, config.split_ratio(), seed);
        if (split.test.empty()) {
            throw PipelineError(kExitInputError,
                                "split_ratio leaves no test documents for perplexity");
        }
        std::vector<TokenizedDoc> kept;
        std::set<std::size_t> in_matrix(matrix.doc_ids().begin(), matrix.doc_ids().end());
        for (const auto& d : docs) {
            if (in_matrix.count(d.record_id) != 0) {
                kept.push_back(d);
            }
        }
        stats = cooccurrence_counts(kept, *vocab);
    });
    std::sort(bundle.excluded.begin(), bundle.excluded.end(),
              [](const Exclusion& a, const Exclusion& b) { return a.record_id < b.record_id; });
    manifest.docs_in_matrix = matrix.n_docs();
    manifest.vocab_size = matrix.n_terms();
    manifest.train_docs = split.train.n_docs();
    manifest.test_docs = split.test.n_docs();

    const auto configs = config.model_configs();
    const auto ks = config.ks();
    SweepOptions options;
    options.top_n = config.top_n();
    options.selection = config.coherence_variant();
    options.epsilon = config.perplexity_epsilon();
    options.threads = config.threads();

    for (const auto kind : config.models()) {
        SweepResult sweep;
        try {
            sweep = timer.run("sweep_" + lower_name(kind), [&] {
                return sweep_topic_count(split, stats, ks, kind, configs, options);
            });
        } catch (const ModelFitError& e) {
            throw PipelineError(kExitModelFailure, e.what());
        }
        std::size_t pick = 0;
        for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
            if (sweep.rows[i].num_topics == sweep.selected_k) {
                pick = i;
            }
        }
        const auto& row = sweep.rows[pick];
        auto& model = sweep.models[pick];

        EvalReport report;
        report.kind = kind;
        report.selected_k = sweep.selected_k;
        report.coherence_umass = row.coherence_umass;
        report.coherence_npmi = row.coherence_npmi;
        report.perplexity = row.perplexity;
        for (std::size_t k = 0; k < model.num_topics(); ++k) {
            report.topics.push_back(top_n_words(model, k, options.top_n));
        }
        report.warnings = model.meta.warnings;

        for (auto& r : sweep.rows) {
            if (reproducible) {
                r.fit_seconds = 0.0;
            }
            bundle.sweep.push_back(r);
        }
        bundle.reports.push_back(std::move(report));
        bundle.models.push_back(std::move(model));
    }

    if (reproducible) {
        for (auto& [stage, seconds] : manifest.timings) {
            seconds = 0.0;
        }
    }

    write_outputs(bundle, config.out_dir(), config.wordcloud_n(), reproducible);
    if (config.dump_matrix()) {
        auto m = open_out(config.out_dir() / "matrix.tsv");
        write_matrix_dump(m, matrix);
        auto v = open_out(config.out_dir() / "vocabulary.tsv");
        write_vocabulary_sidecar(v, matrix.vocabulary());
    }
    return bundle;
}

void write_outputs(const ReportBundle& bundle, const std::filesystem::path& dir,
                   std::size_t wordcloud_n, bool reproducible)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw PipelineError(kExitInputError, "cannot create output directory '" + dir.string() +
                                                 "': " + ec.message());
    }
    {
        auto text = open_out(dir / "comparison.txt");
        auto csv = open_out(dir / "comparison.csv");
        emit_comparison_table(bundle, text, csv);
    }
    {
        auto out = open_out(dir / "sweep.csv");
        write_sweep_csv(out, bundle.sweep, reproducible);
    }
    for (std::size_t i = 0; i < bundle.reports.size(); ++i) {
        const auto& report = bundle.reports[i];
        const auto name = lower_name(report.kind);
        {
            auto out = open_out(dir / ("topics_" + name + ".csv"));
            emit_topic_table(report, out);
        }
        if (i < bundle.models.size()) {
            const auto& model = bundle.models[i];
            for (std::size_t k = 0; k < model.num_topics(); ++k) {
                auto out = open_out(dir / ("wordcloud_" + name + "_" + std::to_string(k) + ".csv"));
                emit_wordcloud_freqs(model, k, wordcloud_n, out);
            }
            auto out = open_out(dir / ("model_" + name + ".json"));
            write_model(out, model);
        }
    }
    {
        auto out = open_out(dir / "manifest.json");
        write_manifest(out, bundle.manifest);
    }
    {
        auto out = open_out(dir / "excluded.log");
        write_excluded_log(out, bundle.excluded);
    }
    {
        auto out = open_out(dir / "bundle.json");
        write_bundle(out, bundle);
    }
}

std::vector<const EvalReport*> comparison_order(const ReportBundle& bundle)
{
    std::vector<const EvalReport*> ordered;
    for (auto kind : {ModelKind::Plsa, ModelKind::Nmf, ModelKind::Lda}) {
        for (const auto& r : bundle.reports) {
            if (r.kind == kind) {
                ordered.push_back(&r);
            }
        }
    }
    return ordered;
}

std::vector<std::string> comparison_top_words(const EvalReport& report)
{
    std::vector<std::string> words;
    std::set<std::string> seen;
    for (const auto& topic : report.topics) {
        const auto n = std::min<std::size_t>(3, topic.ranked_terms.size());
        for (std::size_t r = 0; r < n; ++r) {
            const auto& term = topic.ranked_terms[r].term;
            if (seen.insert(term).second) {
                words.push_back(term);
            }
        }
    }
    return words;
}

void emit_comparison_table(const ReportBundle& bundle, std::ostream& text, std::ostream& csv)
{
    const std::vector<std::string> header{"model", "K", "top_words", "coherence_umass",
                                          "coherence_npmi", "perplexity"};
    csv::write_row(csv, header);

    std::vector<std::vector<std::string>> rows;
    for (const auto* r : comparison_order(bundle)) {
        std::string joined;
        for (const auto& w : comparison_top_words(*r)) {
            if (!joined.empty()) {
                joined += ", ";
            }
            joined += w;
        }
        rows.push_back({std::string(to_string(r->kind)), std::to_string(r->selected_k), joined,
                        fmt("%.4f", r->coherence_umass), fmt("%.4f", r->coherence_npmi),
                        fmt("%.4f", r->perplexity)});
        csv::write_row(csv, rows.back());
    }

    // Text layout: fixed columns first, the long word list last.
    const std::vector<std::size_t> order{0, 1, 3, 4, 5, 2};
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        width[c] = header[c].size();
        for (const auto& row : rows) {
            width[c] = std::max(width[c], row[c].size());
        }
    }
    auto emit = [&](const std::vector<std::string>& cells) {
        std::string line;
        for (std::size_t i = 0; i < order.size(); ++i) {
            const auto c = order[i];
            if (i + 1 == order.size()) {
                line += cells[c];
            } else {
                line += cells[c];
                line.append(width[c] - cells[c].size() + 2, ' ');
            }
        }
        text << line << '\n';
    };
    emit(header);
    for (const auto& row : rows) {
        emit(row);
    }
    const auto& reports = bundle.reports;
    if (std::any_of(reports.begin(), reports.end(), [](const auto& r) { return r.kind == ModelKind::Nmf; })) {
        text << "\nNMF perplexity uses the row-normalized H as p(w|z) and the normalized NNLS fold-in "
                "weights as p(z|d).\n";
    }
}

void emit_wordcloud_freqs(const TopicModel& model, std::size_t topic_id, std::size_t n,
                          std::ostream& out)
{
    const auto ranking = top_n_words(model, topic_id, n);
    const std::vector<std::string> header{"term", "weight"};
    csv::write_row(out, header);
    for (const auto& t : ranking.ranked_terms) {
        const std::vector<std::string> row{t.term, fmt("%.9g", t.weight)};
        csv::write_row(out, row);
    }
}

void emit_topic_table(const EvalReport& report, std::ostream& out)
{
    const std::vector<std::string> header{"topic_id", "rank", "term", "weight"};
    csv::write_row(out, header);
    for (const auto& topic : report.topics) {
        for (std::size_t r = 0; r < topic.ranked_terms.size(); ++r) {
            const auto& t = topic.ranked_terms[r];
            const std::vector<std::string> row{std::to_string(topic.topic_id), std::to_string(r + 1),
                                               t.term, fmt("%.9g", t.weight)};
            csv::write_row(out, row);
        }
    }
}

void write_manifest(std::ostream& out, const RunManifest& manifest)
{
    out << manifest_json(manifest).dump(2) << '\n';
}

void write_excluded_log(std::ostream& out, const std::vector<Exclusion>& excluded)
{
    out << "# record_id\treason\n";
    for (const auto& e : excluded) {
        out << e.record_id << '\t' << to_string(e.reason) << '\n';
    }
}

void write_bundle(std::ostream& out, const ReportBundle& bundle)
{
    ordered_json j;
    j["reports"] = ordered_json::array();
    for (const auto& r : bundle.reports) {
        ordered_json jr;
        jr["model"] = to_string(r.kind);
        jr["selected_k"] = r.selected_k;
        jr["coherence_umass"] = r.coherence_umass;
        jr["coherence_npmi"] = r.coherence_npmi;
        jr["perplexity"] = r.perplexity;
        jr["warnings"] = r.warnings;
        jr["topics"] = ordered_json::array();
        for (const auto& topic : r.topics) {
            ordered_json jt;
            jt["topic_id"] = topic.topic_id;
            jt["terms"] = ordered_json::array();
            for (const auto& t : topic.ranked_terms) {
                jt["terms"].push_back({{"id", t.id}, {"term", t.term}, {"weight", t.weight}});
            }
            jr["topics"].push_back(std::move(jt));
        }
        j["reports"].push_back(std::move(jr));
    }
    j["sweep"] = ordered_json::array();
    for (const auto& s : bundle.sweep) {
        j["sweep"].push_back({{"model", to_string(s.kind)},
                              {"K", s.num_topics},
                              {"coherence_umass", s.coherence_umass},
                              {"coherence_npmi", s.coherence_npmi},
                              {"perplexity", s.perplexity},
                              {"fit_seconds", s.fit_seconds}});
    }
    j["excluded"] = ordered_json::array();
    for (const auto& e : bundle.excluded) {
        j["excluded"].push_back({{"record_id", e.record_id}, {"reason", to_string(e.reason)}});
    }
    j["manifest"] = manifest_json(bundle.manifest);
    out << j.dump(1) << '\n';
}

ReportBundle read_bundle(std::istream& in)
{
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, std::string("bundle is not valid JSON: ") + e.what());
    }
    ReportBundle bundle;
    try {
        for (const auto& jr : j.at("reports")) {
            EvalReport r;
            r.kind = kind_from_json(jr.at("model"));
            r.selected_k = jr.at("selected_k").get<std::size_t>();
            r.coherence_umass = jr.at("coherence_umass").get<double>();
            r.coherence_npmi = jr.at("coherence_npmi").get<double>();
            r.perplexity = jr.at("perplexity").get<double>();
            r.warnings = jr.at("warnings").get<std::vector<std::string>>();
            for (const auto& jt : jr.at("topics")) {
                TopicTermRanking topic;
                topic.topic_id = jt.at("topic_id").get<std::size_t>();
                for (const auto& t : jt.at("terms")) {
                    topic.ranked_terms.push_back({t.at("id").get<TermId>(), t.at("term").get<std::string>(),
                                                  t.at("weight").get<double>()});
                }
                r.topics.push_back(std::move(topic));
            }
            bundle.reports.push_back(std::move(r));
        }
        for (const auto& js : j.at("sweep")) {
            SweepRow s;
            s.kind = kind_from_json(js.at("model"));
            s.num_topics = js.at("K").get<std::size_t>();
            s.coherence_umass = js.at("coherence_umass").get<double>();
            s.coherence_npmi = js.at("coherence_npmi").get<double>();
            s.perplexity = js.at("perplexity").get<double>();
            s.fit_seconds = js.at("fit_seconds").get<double>();
            bundle.sweep.push_back(s);
        }
        for (const auto& je : j.at("excluded")) {
            bundle.excluded.push_back(
                {je.at("record_id").get<std::size_t>(), parse_reason(je.at("reason").get<std::string>())});
        }
        bundle.manifest = manifest_from_json(j.at("manifest"));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, std::string("malformed bundle: ") + e.what());
    }
    return bundle;
}

ReportBundle load_bundle(const std::filesystem::path& dir)
{
    const auto path = dir / "bundle.json";
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw PipelineError(kExitInputError, "cannot open '" + path.string() + "'");
    }
    try {
        return read_bundle(in);
    } catch (const ParseError& e) {
        throw PipelineError(kExitInputError, path.string() + ": " + e.what());
    }
}

} // namespace topicforge
