#include "oracles.hpp"
#include "test_helpers.hpp"

#include "topicforge/eval_metrics.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace topicforge;

namespace {

/// Fold-in that ignores the document and returns a fixed mixture.
FoldIn fixed_mixture(std::vector<double> theta)
{
    return [theta](const TopicModel&, SparseDoc, std::size_t) { return theta; };
}

CooccurrenceStats stats_from(const oracle::Counts& counts)
{
    std::vector<TokenizedDoc> docs;
    std::vector<std::string> terms;
    for (std::size_t t = 0; t < counts.front().size(); ++t) {
        terms.push_back("t" + std::to_string(t));
    }
    for (std::size_t d = 0; d < counts.size(); ++d) {
        TokenizedDoc doc{d, {}};
        for (std::size_t t = 0; t < counts[d].size(); ++t) {
            for (std::uint32_t c = 0; c < counts[d][t]; ++c) {
                doc.tokens.push_back(terms[t]);
            }
        }
        docs.push_back(doc);
    }
    return cooccurrence_counts(docs, Vocabulary(terms, std::vector<std::size_t>(terms.size(), 1)));
}

ModelConfigs fast_configs()
{
    ModelConfigs c;
    c.lda.iterations = 60;
    c.lda.burn_in = 30;
    c.plsa.max_iterations = 60;
    c.nmf.max_iterations = 100;
    return c;
}

} // namespace

TEST_SUITE("eval_metrics")
{
    TEST_CASE("uniform model perplexity equals the vocabulary size")
    {
        std::mt19937_64 gen(1);
        const auto model = testing::make_model(ModelKind::Lda, {std::vector<double>(8, 1.0 / 8.0)});
        for (int trial = 0; trial < 20; ++trial) {
            const auto heldout = DocTermMatrix::from_dense(oracle::random_counts(gen, 1 + gen() % 6, 8));
            const auto r = perplexity(model, heldout, fixed_mixture({1.0}));
            CHECK(std::abs(r.value - 8.0) <= 1e-9);
            CHECK(r.heldout_docs == heldout.n_docs());
            CHECK(r.heldout_tokens == heldout.total_mass());
        }
    }

    TEST_CASE("hand-computed 'a a b' case")
    {
        const auto model = testing::make_model(ModelKind::Lda, {{2.0 / 3.0, 1.0 / 3.0}});
        const auto heldout = DocTermMatrix::from_dense({{2, 1}});
        const auto r = perplexity(model, heldout, fixed_mixture({1.0}), 0.0);
        CHECK(r.value == doctest::Approx(1.88988).epsilon(1e-4 / 1.88988));
        CHECK(r.value == doctest::Approx(std::exp(-(2.0 * std::log(2.0 / 3.0) + std::log(1.0 / 3.0)) / 3.0)));
    }

    TEST_CASE("perplexity matches a token-level oracle")
    {
        std::mt19937_64 gen(9);
        for (int trial = 0; trial < 30; ++trial) {
            const auto rows = oracle::random_distributions(gen, 3, 6);
            const auto model = testing::make_model(ModelKind::Plsa, rows);
            const auto counts = oracle::random_counts(gen, 4, 6);
            const auto thetas = oracle::random_distributions(gen, 4, 3);
            FoldIn by_position = [&](const TopicModel&, SparseDoc, std::size_t pos) { return thetas[pos]; };
            std::vector<std::vector<double>> dists;
            for (const auto& th : thetas) {
                std::vector<double> p(6, 0.0);
                for (std::size_t w = 0; w < 6; ++w) {
                    for (std::size_t k = 0; k < 3; ++k) {
                        p[w] += th[k] * rows[k][w];
                    }
                }
                dists.push_back(p);
            }
            const auto value = perplexity(model, DocTermMatrix::from_dense(counts), by_position, 1e-12).value;
            CHECK(value == doctest::Approx(oracle::perplexity(dists, counts, 1e-12)).epsilon(1e-12));
            CHECK(value >= 1.0);

            // Replacing each document's distribution by its empirical one cannot do worse.
            std::vector<std::vector<double>> empirical;
            for (const auto& row : counts) {
                double n = 0.0;
                for (auto c : row) {
                    n += c;
                }
                std::vector<double> e;
                for (auto c : row) {
                    e.push_back(c / n);
                }
                empirical.push_back(e);
            }
            CHECK(oracle::perplexity(empirical, counts, 0.0) <= value + 1e-12);
            std::vector<std::vector<double>> emp_rows = empirical;
            const auto emp_model = testing::make_model(ModelKind::Plsa, emp_rows);
            FoldIn own_row = [&](const TopicModel&, SparseDoc, std::size_t pos) {
                std::vector<double> th(counts.size(), 0.0);
                th[pos] = 1.0;
                return th;
            };
            CHECK(perplexity(emp_model, DocTermMatrix::from_dense(counts), own_row, 0.0).value <= value + 1e-12);
        }
    }

    TEST_CASE("perplexity errors")
    {
        const auto model = testing::make_model(ModelKind::Lda, {{1.0, 0.0}});
        CHECK_THROWS_WITH(perplexity(model, DocTermMatrix{}, fixed_mixture({1.0})), "no test documents");
        const auto heldout = DocTermMatrix::from_dense({{1, 1}});
        try {
            perplexity(model, heldout, fixed_mixture({1.0}), 0.0);
            FAIL("expected ZeroProbabilityError");
        } catch (const ZeroProbabilityError& e) {
            CHECK(e.term() == "t1");
            CHECK(e.doc_id() == 0);
        }
        CHECK(std::isfinite(perplexity(model, heldout, fixed_mixture({1.0}), 1e-12).value));
        CHECK_THROWS_AS(perplexity(model, heldout, fixed_mixture({1.0}), -1.0), std::invalid_argument);
    }

    TEST_CASE("coherence examples")
    {
        // docs (a b), (a c)
        const auto stats = stats_from({{1, 1, 0}, {1, 0, 1}});
        const auto model = testing::make_model(ModelKind::Lda, {{0.6, 0.3, 0.1}});
        const auto umass = coherence(model, stats, 2, CoherenceVariant::UMass);
        CHECK(umass.per_topic[0] == 0.0);
        CHECK(umass.mean == 0.0);

        const auto one = coherence(model, stats, 1, CoherenceVariant::Npmi);
        CHECK(one.per_topic[0] == 0.0);
        CHECK_FALSE(one.warnings.empty());

        // Both words in every document.
        const auto everywhere = stats_from({{1, 1}, {2, 1}});
        const auto pair_model = testing::make_model(ModelKind::Lda, {{0.5, 0.5}});
        CHECK(npmi_pair(0, 1, everywhere) == 0.0);
        CHECK(coherence(pair_model, everywhere, 2, CoherenceVariant::Npmi).mean == 0.0);

        // Never together.
        CHECK(npmi_pair(1, 2, stats) == -1.0);
        CHECK_THROWS_AS(coherence(model, stats, 0), std::invalid_argument);
        CHECK_THROWS_AS(coherence(pair_model, stats, 2), std::invalid_argument);
    }

    TEST_CASE("coherence matches the brute-force oracle exactly on small corpora")
    {
        std::mt19937_64 gen(2024);
        int corpora = 0;
        for (std::size_t docs = 1; docs <= 5; ++docs) {
            for (std::size_t terms = 2; terms <= 6; ++terms) {
                for (int rep = 0; rep < 3; ++rep) {
                    ++corpora;
                    const auto counts = oracle::random_counts(gen, docs, terms, 2, 0.5);
                    const auto sets = oracle::presence(counts);
                    // Terms that never occur cannot be ranked under UMass.
                    std::vector<double> df(terms, 0.0);
                    for (std::size_t t = 0; t < terms; ++t) {
                        df[t] = static_cast<double>(oracle::docs_containing(sets, {t}));
                    }
                    const auto stats = stats_from(counts);
                    auto rows = oracle::random_distributions(gen, 3, terms);
                    for (auto& row : rows) {
                        for (std::size_t t = 0; t < terms; ++t) {
                            if (df[t] == 0.0) {
                                row[t] = 0.0;
                            }
                        }
                    }
                    const auto model = testing::make_model(ModelKind::Lda, rows);
                    std::size_t present = 0;
                    for (double x : df) {
                        present += x > 0.0 ? 1 : 0;
                    }
                    for (std::size_t n = 1; n <= present; ++n) {
                        const auto u = coherence(model, stats, n, CoherenceVariant::UMass);
                        const auto p = coherence(model, stats, n, CoherenceVariant::Npmi);
                        double mean_u = 0.0, mean_p = 0.0;
                        for (std::size_t k = 0; k < rows.size(); ++k) {
                            const auto ranked = oracle::rank_row(rows[k], n);
                            const double ou = oracle::umass(sets, ranked);
                            const double op = oracle::npmi(sets, ranked);
                            CHECK(u.per_topic[k] == ou);
                            CHECK(p.per_topic[k] == op);
                            CHECK(p.per_topic[k] >= -1.0);
                            CHECK(p.per_topic[k] <= 1.0);
                            mean_u += ou;
                            mean_p += op;
                        }
                        CHECK(u.mean == doctest::Approx(mean_u / 3.0).epsilon(1e-15));
                        CHECK(p.mean == doctest::Approx(mean_p / 3.0).epsilon(1e-15));
                    }
                }
            }
        }
        CHECK(corpora >= 50);
    }

    TEST_CASE("coherence is invariant under positive rescaling of topic weights")
    {
        std::mt19937_64 gen(3);
        const auto counts = oracle::random_counts(gen, 5, 6);
        const auto stats = stats_from(counts);
        auto rows = oracle::random_distributions(gen, 2, 6);
        auto scaled = rows;
        for (auto& r : scaled) {
            for (auto& x : r) {
                x *= 3.0;
            }
        }
        const auto a = coherence(testing::make_model(ModelKind::Nmf, rows), stats, 4);
        const auto b = coherence(testing::make_model(ModelKind::Nmf, scaled), stats, 4);
        CHECK(a.per_topic == b.per_topic);
    }

    TEST_CASE("umass normalized column divides by the pair count")
    {
        const auto stats = stats_from({{1, 1, 1}, {1, 0, 1}, {0, 1, 1}});
        const auto model = testing::make_model(ModelKind::Lda, {{0.5, 0.3, 0.2}});
        const auto r = coherence(model, stats, 3, CoherenceVariant::UMass);
        CHECK(r.per_topic_normalized[0] == doctest::Approx(r.per_topic[0] / 3.0));
    }

    TEST_CASE("select_topic_count: argmax with ties to the smaller K")
    {
        std::vector<SweepRow> rows(3);
        rows[0].num_topics = 10;
        rows[0].coherence_npmi = 0.2;
        rows[1].num_topics = 5;
        rows[1].coherence_npmi = 0.2;
        rows[2].num_topics = 2;
        rows[2].coherence_npmi = 0.1;
        rows[2].coherence_umass = 5.0;
        CHECK(select_topic_count(rows, CoherenceVariant::Npmi) == 5);
        CHECK(select_topic_count(rows, CoherenceVariant::UMass) == 2);
        CHECK_THROWS_AS(select_topic_count({}, CoherenceVariant::Npmi), std::invalid_argument);
    }

    TEST_CASE("sweep over the fixture corpus")
    {
        const auto corpus = testing::load_fixture_corpus();
        const auto split = split_train_test(corpus.matrix, 0.8, 42);
        const auto stats = cooccurrence_counts(corpus.docs, corpus.matrix.vocabulary());
        const std::vector<std::size_t> single{2};
        for (auto kind : {ModelKind::Lda, ModelKind::Plsa, ModelKind::Nmf}) {
            const auto one = sweep_topic_count(split, stats, single, kind, fast_configs());
            CHECK(one.rows.size() == 1);
            CHECK(one.selected_k == 2);
        }
        const std::vector<std::size_t> ks{2, 5, 10};
        for (auto kind : {ModelKind::Lda, ModelKind::Plsa, ModelKind::Nmf}) {
            const auto r = sweep_topic_count(split, stats, ks, kind, fast_configs());
            REQUIRE(r.rows.size() == 3);
            for (std::size_t i = 0; i < 3; ++i) {
                CHECK(r.rows[i].num_topics == ks[i]);
                CHECK(r.rows[i].kind == kind);
                CHECK(std::isfinite(r.rows[i].perplexity));
                CHECK(std::isfinite(r.rows[i].coherence_umass));
                CHECK(std::isfinite(r.rows[i].coherence_npmi));
                CHECK(r.models[i].num_topics() == ks[i]);
            }
        }
    }

    TEST_CASE("sweep results do not depend on the thread count")
    {
        const auto corpus = testing::load_fixture_corpus();
        const auto split = split_train_test(corpus.matrix, 0.8, 42);
        const auto stats = cooccurrence_counts(corpus.docs, corpus.matrix.vocabulary());
        const std::vector<std::size_t> ks{2, 3, 4};
        SweepOptions serial;
        SweepOptions parallel;
        parallel.threads = 3;
        const auto a = sweep_topic_count(split, stats, ks, ModelKind::Lda, fast_configs(), serial);
        const auto b = sweep_topic_count(split, stats, ks, ModelKind::Lda, fast_configs(), parallel);
        for (std::size_t i = 0; i < ks.size(); ++i) {
            CHECK(a.rows[i].coherence_npmi == b.rows[i].coherence_npmi);
            CHECK(a.rows[i].perplexity == b.rows[i].perplexity);
            CHECK(a.models[i].topic_word == b.models[i].topic_word);
        }
    }

    TEST_CASE("sweep errors are annotated with the model and K")
    {
        const auto corpus = testing::load_fixture_corpus();
        const auto split = split_train_test(corpus.matrix, 0.8, 42);
        const auto stats = cooccurrence_counts(corpus.docs, corpus.matrix.vocabulary());
        auto bad = fast_configs();
        bad.lda.beta = -1.0;
        const std::vector<std::size_t> ks{3};
        try {
            sweep_topic_count(split, stats, ks, ModelKind::Lda, bad);
            FAIL("expected ModelFitError");
        } catch (const ModelFitError& e) {
            CHECK(e.num_topics() == 3);
            CHECK(e.kind() == ModelKind::Lda);
            CHECK(std::string(e.what()).find("K = 3") != std::string::npos);
        }
        const std::vector<std::size_t> none;
        CHECK_THROWS_AS(sweep_topic_count(split, stats, none, ModelKind::Lda, bad), std::invalid_argument);
    }

    TEST_CASE("sweep csv format")
    {
        SweepRow r;
        r.kind = ModelKind::Nmf;
        r.num_topics = 5;
        r.coherence_umass = -1.5;
        r.coherence_npmi = 0.25;
        r.perplexity = 37.125;
        r.fit_seconds = 1.5;
        std::ostringstream out;
        write_sweep_csv(out, std::vector<SweepRow>{r}, false);
        CHECK(out.str() == "model,K,coherence_umass,coherence_npmi,perplexity,fit_seconds\n"
                           "NMF,5,-1.500000,0.250000,37.125000,1.500\n");
        std::ostringstream masked;
        write_sweep_csv(masked, std::vector<SweepRow>{r}, true);
        CHECK(masked.str().ends_with(",0.000\n"));
    }
}
