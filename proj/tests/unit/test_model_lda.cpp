#include "oracles.hpp"
#include "test_helpers.hpp"

#include "topicforge/model_lda.hpp"
#include "topicforge/random.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace topicforge;

namespace {

LdaConfig quick(std::size_t k, std::uint64_t seed)
{
    LdaConfig c;
    c.num_topics = k;
    c.iterations = 200;
    c.burn_in = 100;
    c.thin = 5;
    c.seed = seed;
    return c;
}

std::size_t argmax(const std::vector<double>& v)
{
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

} // namespace

TEST_SUITE("model_lda")
{
    TEST_CASE("K = 1 matches the closed form")
    {
        const auto corpus = testing::load_fixture_corpus();
        const auto& m = corpus.matrix;
        auto cfg = quick(1, 5);
        const auto model = fit_lda(m, cfg);
        const double beta = cfg.beta;
        const double v = static_cast<double>(m.n_terms());
        std::vector<double> n_w(m.n_terms(), 0.0);
        double n = 0.0;
        for (std::size_t d = 0; d < m.n_docs(); ++d) {
            for (const auto& e : m.row(d)) {
                n_w[e.term] += e.count;
                n += e.count;
            }
        }
        for (std::size_t w = 0; w < m.n_terms(); ++w) {
            CHECK(std::abs(model.topic_word(0, w) - (n_w[w] + beta) / (n + v * beta)) <= 1e-12);
        }
        for (std::size_t d = 0; d < m.n_docs(); ++d) {
            CHECK(model.doc_topic(d, 0) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }

    TEST_CASE("fit is deterministic per seed and returns valid distributions")
    {
        const auto corpus = testing::load_fixture_corpus();
        const auto a = fit_lda(corpus.matrix, quick(3, 9));
        const auto b = fit_lda(corpus.matrix, quick(3, 9));
        CHECK(a.topic_word == b.topic_word);
        CHECK(a.doc_topic == b.doc_topic);
        CHECK(a.meta == b.meta);
        CHECK_NOTHROW(a.validate());
        CHECK(a.kind == ModelKind::Lda);
        CHECK(a.doc_topic.rows() == corpus.matrix.n_docs());
        const auto c = fit_lda(corpus.matrix, quick(3, 10));
        CHECK_FALSE(a.topic_word == c.topic_word);
    }

    TEST_CASE("counts are conserved after every sweep")
    {
        const auto corpus = testing::load_fixture_corpus();
        const auto total = corpus.matrix.total_mass();
        std::size_t sweeps = 0;
        auto cfg = quick(4, 2);
        cfg.iterations = 50;
        cfg.burn_in = 10;
        fit_lda(corpus.matrix, cfg, [&](std::size_t, const GibbsState& s) {
            ++sweeps;
            CHECK(s.counts_consistent());
            std::uint64_t sum_dk = 0, sum_kw = 0, sum_k = 0;
            for (std::size_t d = 0; d < s.num_docs(); ++d) {
                std::uint64_t doc = 0;
                for (std::size_t k = 0; k < s.num_topics(); ++k) {
                    doc += s.n_dk(d, k);
                }
                CHECK(doc == s.doc_end(d) - s.doc_begin(d));
                sum_dk += doc;
            }
            for (std::size_t k = 0; k < s.num_topics(); ++k) {
                std::uint64_t row = 0;
                for (TermId w = 0; w < s.vocab_size(); ++w) {
                    row += s.n_kw(k, w);
                }
                CHECK(row == s.n_k(k));
                sum_kw += row;
                sum_k += s.n_k(k);
            }
            CHECK(sum_dk == total);
            CHECK(sum_kw == total);
            CHECK(sum_k == total);
        });
        CHECK(sweeps == 50);
    }

    TEST_CASE("full conditionals are distributions")
    {
        const auto corpus = testing::load_fixture_corpus();
        Rng rng(3);
        GibbsState state(corpus.matrix, 5, rng);
        for (std::size_t i = 0; i < state.num_tokens(); ++i) {
            const auto p = state.conditional(i, 10.0, 0.01);
            REQUIRE(p.size() == 5);
            CHECK(std::all_of(p.begin(), p.end(), [](double x) { return x >= 0.0; }));
            CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) <= 1e-12);
        }
    }

    TEST_CASE("two disjoint word groups separate")
    {
        int separated = 0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            std::mt19937_64 gen(seed);
            const auto m = DocTermMatrix::from_dense(oracle::two_group_corpus(gen));
            auto cfg = quick(2, seed);
            const auto model = fit_lda(m, cfg);
            const auto top0 = top_n_words(model, 0, 1).ranked_terms[0].id;
            const auto top1 = top_n_words(model, 1, 1).ranked_terms[0].id;
            separated += ((top0 < 5) != (top1 < 5)) ? 1 : 0;
        }
        CHECK(separated >= 8);
    }

    TEST_CASE("fold-in")
    {
        std::vector<std::vector<double>> rows(5, std::vector<double>(6, 1.0));
        rows[3] = {1.0, 1.0, 1.0, 1.0, 100.0, 100.0};
        for (auto& r : rows) {
            const double s = std::accumulate(r.begin(), r.end(), 0.0);
            for (auto& x : r) {
                x /= s;
            }
        }
        const auto model = testing::make_model(ModelKind::Lda, rows);
        auto cfg = quick(5, 1);

        const auto empty = lda_fold_in(model, {}, cfg);
        for (double p : empty) {
            CHECK(p == doctest::Approx(0.2).epsilon(1e-15));
        }

        const std::vector<TermCount> doc{{4, 6}, {5, 6}};
        const auto theta = lda_fold_in(model, doc, cfg);
        CHECK(argmax(theta) == 3);
        CHECK(std::accumulate(theta.begin(), theta.end(), 0.0) == doctest::Approx(1.0));
        CHECK(lda_fold_in(model, doc, cfg) == theta);

        auto other = model;
        other.kind = ModelKind::Nmf;
        CHECK_THROWS_AS(lda_fold_in(other, doc, cfg), std::invalid_argument);
    }

    TEST_CASE("fold-in leaves the model untouched")
    {
        const auto corpus = testing::load_fixture_corpus();
        const auto model = fit_lda(corpus.matrix, quick(3, 4));
        const auto before = model.topic_word;
        (void)lda_fold_in(model, corpus.matrix.row(0), quick(3, 4));
        CHECK(model.topic_word == before);
    }

    TEST_CASE("configuration and input errors")
    {
        const auto corpus = testing::load_fixture_corpus();
        auto cfg = quick(0, 1);
        CHECK_THROWS_AS(fit_lda(corpus.matrix, cfg), std::invalid_argument);
        cfg = quick(2, 1);
        cfg.burn_in = cfg.iterations;
        CHECK_THROWS_AS(fit_lda(corpus.matrix, cfg), std::invalid_argument);
        cfg = quick(2, 1);
        cfg.beta = 0.0;
        CHECK_THROWS_AS(fit_lda(corpus.matrix, cfg), std::invalid_argument);
        cfg = quick(2, 1);
        cfg.alpha = -1.0;
        CHECK_THROWS_AS(fit_lda(corpus.matrix, cfg), std::invalid_argument);
        CHECK_THROWS_AS(fit_lda(DocTermMatrix{}, quick(2, 1)), std::invalid_argument);
        CHECK(quick(4, 1).effective_alpha() == doctest::Approx(12.5));
    }
}
