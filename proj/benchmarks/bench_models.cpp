// Microbenchmarks for the inner loops of the three models and the metrics.
// The corpus is synthetic: Zipf-like term draws over a fixed vocabulary.

#include <topicforge/dtm.hpp>
#include <topicforge/eval_metrics.hpp>
#include <topicforge/model_lda.hpp>
#include <topicforge/model_nmf.hpp>
#include <topicforge/model_plsa.hpp>
#include <topicforge/random.hpp>

#include <benchmark/benchmark.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

using namespace topicforge;

namespace {

struct Corpus
{
    std::vector<TokenizedDoc> docs;
    std::shared_ptr<const Vocabulary> vocab;
    DocTermMatrix matrix;
};

Corpus make_corpus(std::size_t n_docs, std::size_t n_terms, std::size_t doc_length)
{
    Rng rng(7);
    std::vector<std::string> names(n_terms);
    for (std::size_t t = 0; t < n_terms; ++t) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "w%05zu", t);
        names[t] = buf;
    }
    std::vector<TokenizedDoc> docs(n_docs);
    for (std::size_t d = 0; d < n_docs; ++d) {
        docs[d].record_id = d;
        for (std::size_t i = 0; i < doc_length; ++i) {
            const double u = rng.uniform_positive();
            const auto t = static_cast<std::size_t>(std::pow(static_cast<double>(n_terms), u)) - 1;
            docs[d].tokens.push_back(names[std::min(t, n_terms - 1)]);
        }
    }
    auto vocab = std::make_shared<const Vocabulary>(build_vocabulary(docs, 2, 1.0));
    auto matrix = build_matrix(docs, vocab);
    return {std::move(docs), std::move(vocab), std::move(matrix)};
}

const Corpus& corpus()
{
    static const Corpus c = make_corpus(1000, 2000, 30);
    return c;
}

void BM_LdaSweep(benchmark::State& state)
{
    const auto k = static_cast<std::size_t>(state.range(0));
    Rng rng(1);
    GibbsState gibbs(corpus().matrix, k, rng);
    const double alpha = 50.0 / static_cast<double>(k);
    for (auto _ : state) {
        gibbs.sweep(alpha, 0.01, rng);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * gibbs.num_tokens()));
}
BENCHMARK(BM_LdaSweep)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_PlsaEmStep(benchmark::State& state)
{
    PlsaConfig config;
    config.num_topics = static_cast<std::size_t>(state.range(0));
    config.max_iterations = 1;
    config.early_stop_fraction = 0.0;
    const auto model = fit_plsa(corpus().matrix, config);
    PlsaParams params{model.topic_word, model.doc_topic};
    for (auto _ : state) {
        params = plsa_em_step(corpus().matrix, params);
        benchmark::DoNotOptimize(params);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * corpus().matrix.nnz()));
}
BENCHMARK(BM_PlsaEmStep)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_NmfIteration(benchmark::State& state)
{
    NmfConfig config;
    config.num_topics = static_cast<std::size_t>(state.range(0));
    config.max_iterations = 10;
    config.tol = 1e-300;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_nmf(corpus().matrix, config));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * config.max_iterations));
}
BENCHMARK(BM_NmfIteration)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_Coherence(benchmark::State& state)
{
    const auto variant = state.range(0) == 0 ? CoherenceVariant::UMass : CoherenceVariant::Npmi;
    const auto stats = cooccurrence_counts(corpus().docs, *corpus().vocab);
    NmfConfig config;
    config.num_topics = 20;
    config.max_iterations = 5;
    const auto model = nmf_to_topic_model(fit_nmf(corpus().matrix, config), corpus().vocab);
    for (auto _ : state) {
        benchmark::DoNotOptimize(coherence(model, stats, 10, variant));
    }
    state.SetLabel(std::string(to_string(variant)));
}
BENCHMARK(BM_Coherence)->Arg(0)->Arg(1);

void BM_Cooccurrence(benchmark::State& state)
{
    for (auto _ : state) {
        benchmark::DoNotOptimize(cooccurrence_counts(corpus().docs, *corpus().vocab));
    }
}
BENCHMARK(BM_Cooccurrence)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
