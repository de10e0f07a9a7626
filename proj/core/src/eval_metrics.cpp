#include "topicforge/eval_metrics.hpp"

#include "topicforge/ingest.hpp"
#include "topicforge/random.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <memory>
#include <thread>

namespace topicforge {

namespace {

constexpr double kNpmiGuard = 1e-12;

std::string format_number(const char* fmt, double value)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, value);
    return buf;
}

} // namespace

PerplexityResult perplexity(const TopicModel& model, const DocTermMatrix& heldout,
                            const FoldIn& fold_in, double epsilon)
{
    if (heldout.empty()) {
        throw std::invalid_argument("no test documents");
    }
    if (!(epsilon >= 0.0)) {
        throw std::invalid_argument("perplexity epsilon must be non-negative");
    }
    double loglik = 0.0;
    std::size_t tokens = 0;
    for (std::size_t d = 0; d < heldout.n_docs(); ++d) {
        const auto doc = heldout.row(d);
        const auto theta = fold_in(model, doc, d);
        const auto dist = predictive_word_dist(model, theta);
        for (const auto& e : doc) {
            const double p = dist.at(e.term) + epsilon;
            if (!(p > 0.0)) {
                const std::string term =
                    model.vocab ? model.vocab->term(e.term) : "t" + std::to_string(e.term);
                throw ZeroProbabilityError(heldout.doc_id(d), term);
            }
            loglik += e.count * std::log(p);
            tokens += e.count;
        }
    }
    PerplexityResult result;
    result.value = std::exp(-loglik / static_cast<double>(tokens));
    result.heldout_docs = heldout.n_docs();
    result.heldout_tokens = tokens;
    result.smoothing_epsilon = epsilon;
    return result;
}

std::string_view to_string(CoherenceVariant variant)
{
    return variant == CoherenceVariant::UMass ? "umass" : "npmi";
}

std::optional<CoherenceVariant> parse_coherence_variant(std::string_view name)
{
    if (name == "umass") {
        return CoherenceVariant::UMass;
    }
    if (name == "npmi") {
        return CoherenceVariant::Npmi;
    }
    return std::nullopt;
}

double umass_score(std::span<const TermId> ranked, const CooccurrenceStats& stats)
{
    double score = 0.0;
    for (std::size_t i = 1; i < ranked.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const auto dj = stats.single(ranked[j]);
            if (dj == 0) {
                throw std::invalid_argument("term " + std::to_string(ranked[j]) +
                                            " never occurs in the co-occurrence corpus");
            }
            const auto dij = stats.pair(ranked[i], ranked[j]);
            score += std::log((static_cast<double>(dij) + 1.0) / static_cast<double>(dj));
        }
    }
    return score;
}

double npmi_pair(TermId a, TermId b, const CooccurrenceStats& stats)
{
    const auto joint = stats.pair(a, b);
    if (joint == 0) {
        return -1.0;
    }
    const double n = static_cast<double>(stats.doc_count());
    const double p_ab = static_cast<double>(joint) / n;
    const double p_a = static_cast<double>(stats.single(a)) / n;
    const double p_b = static_cast<double>(stats.single(b)) / n;
    const double denom = -std::log(p_ab);
    if (denom < kNpmiGuard) {
        return 0.0;
    }
    const double value = std::log(p_ab / (p_a * p_b)) / denom;
    return std::clamp(value, -1.0, 1.0);
}

double npmi_score(std::span<const TermId> ranked, const CooccurrenceStats& stats)
{
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 1; i < ranked.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            total += npmi_pair(ranked[i], ranked[j], stats);
            ++pairs;
        }
    }
    return pairs == 0 ? 0.0 : total / static_cast<double>(pairs);
}

CoherenceResult coherence(const TopicModel& model, const CooccurrenceStats& stats,
                          std::size_t top_n, CoherenceVariant variant)
{
    if (top_n < 1) {
        throw std::invalid_argument("coherence needs top_n >= 1");
    }
    if (stats.n_terms() != model.vocab_size()) {
        throw std::invalid_argument("co-occurrence statistics do not cover the model vocabulary");
    }
    CoherenceResult result;
    result.variant = variant;
    result.top_n = top_n;
    if (top_n == 1) {
        result.warnings.push_back("top_n = 1 leaves no word pairs; coherence is 0 by convention");
    }
    std::vector<TermId> ids;
    for (std::size_t k = 0; k < model.num_topics(); ++k) {
        const auto ranking = top_n_words(model, k, top_n);
        ids.clear();
        for (const auto& t : ranking.ranked_terms) {
            ids.push_back(t.id);
        }
        const std::size_t pairs = ids.size() * (ids.size() - 1) / 2;
        double score = 0.0;
        double normalized = 0.0;
        if (pairs > 0) {
            if (variant == CoherenceVariant::UMass) {
                score = umass_score(ids, stats);
                normalized = score / static_cast<double>(pairs);
            } else {
                score = npmi_score(ids, stats);
                normalized = score;
            }
        }
        result.per_topic.push_back(score);
        result.per_topic_normalized.push_back(normalized);
    }
    double sum = 0.0;
    for (double s : result.per_topic) {
        sum += s;
    }
    result.mean = sum / static_cast<double>(result.per_topic.size());
    return result;
}

TopicModel fit_topic_model(ModelKind kind, const DocTermMatrix& train, const ModelConfigs& configs,
                           std::size_t num_topics)
{
    switch (kind) {
    case ModelKind::Lda: {
        auto cfg = configs.lda;
        cfg.num_topics = num_topics;
        return fit_lda(train, cfg);
    }
    case ModelKind::Plsa: {
        auto cfg = configs.plsa;
        cfg.num_topics = num_topics;
        return fit_plsa(train, cfg);
    }
    case ModelKind::Nmf: {
        auto cfg = configs.nmf;
        cfg.num_topics = num_topics;
        return nmf_to_topic_model(fit_nmf(train, cfg), train.vocabulary_ptr());
    }
    }
    throw std::invalid_argument("unknown model kind");
}

FoldIn make_fold_in(const TopicModel& model, const ModelConfigs& configs)
{
    switch (model.kind) {
    case ModelKind::Lda: {
        auto cfg = configs.lda;
        cfg.num_topics = model.num_topics();
        return [cfg](const TopicModel& m, SparseDoc doc, std::size_t position) {
            auto local = cfg;
            local.seed = mix_seed(cfg.seed, position);
            return lda_fold_in(m, doc, local);
        };
    }
    case ModelKind::Plsa: {
        auto cfg = configs.plsa;
        cfg.num_topics = model.num_topics();
        return [cfg](const TopicModel& m, SparseDoc doc, std::size_t) {
            return plsa_fold_in(m, doc, cfg);
        };
    }
    case ModelKind::Nmf: {
        auto cfg = configs.nmf;
        cfg.num_topics = model.num_topics();
        auto gram = std::make_shared<const Matrix>(topic_gram(model));
        return [cfg, gram](const TopicModel& m, SparseDoc doc, std::size_t) {
            return nmf_fold_in(m, doc, cfg, gram.get());
        };
    }
    }
    throw std::invalid_argument("unknown model kind");
}

std::size_t select_topic_count(std::span<const SweepRow> rows, CoherenceVariant variant)
{
    if (rows.empty()) {
        throw std::invalid_argument("no sweep rows to select from");
    }
    const SweepRow* best = &rows.front();
    for (const auto& row : rows) {
        const double score = row.coherence_mean(variant);
        const double best_score = best->coherence_mean(variant);
        if (score > best_score || (score == best_score && row.num_topics < best->num_topics)) {
            best = &row;
        }
    }
    return best->num_topics;
}

SweepResult sweep_topic_count(const CorpusSplit& split, const CooccurrenceStats& stats,
                              std::span<const std::size_t> ks, ModelKind kind,
                              const ModelConfigs& configs, const SweepOptions& options)
{
    if (ks.empty()) {
        throw std::invalid_argument("topic-count sweep needs at least one K");
    }
    for (auto k : ks) {
        if (k < 1) {
            throw std::invalid_argument("every K in the sweep must be at least 1");
        }
    }

    const std::size_t n = ks.size();
    SweepResult result;
    result.rows.resize(n);
    result.models.resize(n);
    std::vector<std::exception_ptr> errors(n);

    auto run_one = [&](std::size_t i) {
        const std::size_t k = ks[i];
        try {
            const auto start = std::chrono::steady_clock::now();
            TopicModel model = fit_topic_model(kind, split.train, configs, k);
            const auto stop = std::chrono::steady_clock::now();

            SweepRow row;
            row.kind = kind;
            row.num_topics = k;
            row.fit_seconds = std::chrono::duration<double>(stop - start).count();
            row.coherence_umass = coherence(model, stats, options.top_n, CoherenceVariant::UMass).mean;
            row.coherence_npmi = coherence(model, stats, options.top_n, CoherenceVariant::Npmi).mean;
            row.perplexity =
                perplexity(model, split.test, make_fold_in(model, configs), options.epsilon).value;
            result.rows[i] = row;
            result.models[i] = std::move(model);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };

    const std::size_t workers = std::clamp<std::size_t>(options.threads, 1, n);
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            run_one(i);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    run_one(i);
                }
            });
        }
        for (auto& t : pool) {
            t.join();
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (!errors[i]) {
            continue;
        }
        try {
            std::rethrow_exception(errors[i]);
        } catch (const std::exception& e) {
            throw ModelFitError(kind, ks[i], e.what());
        }
    }
    result.selected_k = select_topic_count(result.rows, options.selection);
    return result;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows, bool mask_timings)
{
    out << "model,K,coherence_umass,coherence_npmi,perplexity,fit_seconds\n";
    for (const auto& r : rows) {
        const std::vector<std::string> fields{
            std::string(to_string(r.kind)),
            std::to_string(r.num_topics),
            format_number("%.6f", r.coherence_umass),
            format_number("%.6f", r.coherence_npmi),
            format_number("%.6f", r.perplexity),
            format_number("%.3f", mask_timings ? 0.0 : r.fit_seconds)};
        csv::write_row(out, fields);
    }
}

} // namespace topicforge
