#include "oracles.hpp"
#include "test_helpers.hpp"

#include "topicforge/model_plsa.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace topicforge;

namespace {

PlsaConfig config(std::size_t k, std::uint64_t seed, double early_stop = 0.0)
{
    PlsaConfig c;
    c.num_topics = k;
    c.seed = seed;
    c.early_stop_fraction = early_stop;
    return c;
}

void check_rows_normalized(const Matrix& m)
{
    for (std::size_t r = 0; r < m.rows(); ++r) {
        double s = 0.0;
        for (double x : m.row(r)) {
            CHECK(x >= 0.0);
            s += x;
        }
        CHECK(std::abs(s - 1.0) <= 1e-9);
    }
}

} // namespace

TEST_SUITE("model_plsa")
{
    TEST_CASE("K = 1: one EM step gives the unigram frequencies")
    {
        std::mt19937_64 gen(1);
        const auto counts = oracle::random_counts(gen, 7, 6);
        const auto m = DocTermMatrix::from_dense(counts);
        PlsaParams init{testing::to_matrix(oracle::random_distributions(gen, 1, 6)),
                        Matrix(7, 1, 1.0)};
        const auto next = plsa_em_step(m, init);
        double n = 0.0;
        std::vector<double> n_w(6, 0.0);
        for (const auto& row : counts) {
            for (std::size_t w = 0; w < 6; ++w) {
                n_w[w] += row[w];
                n += row[w];
            }
        }
        for (std::size_t w = 0; w < 6; ++w) {
            CHECK(std::abs(next.p_w_given_z(0, w) - n_w[w] / n) <= 1e-12);
        }

        auto cfg = config(1, 3);
        cfg.max_iterations = 1;
        const auto model = fit_plsa(m, cfg);
        for (std::size_t w = 0; w < 6; ++w) {
            CHECK(std::abs(model.topic_word(0, w) - n_w[w] / n) <= 1e-12);
        }
    }

    TEST_CASE("log-likelihood is non-decreasing on random 5 x 4 matrices")
    {
        std::mt19937_64 gen(12);
        for (int trial = 0; trial < 40; ++trial) {
            const auto counts = oracle::random_counts(gen, 5, 4);
            const auto m = DocTermMatrix::from_dense(counts);
            const auto k = 1 + gen() % 3;
            double previous = -INFINITY;
            std::size_t calls = 0;
            const auto model = fit_plsa(m, config(k, gen()), [&](std::size_t, const PlsaParams& p, double ll) {
                ++calls;
                CHECK(ll >= previous - 1e-9);
                const double independent = oracle::plsa_loglik(counts, testing::to_rows(p.p_w_given_z),
                                                               testing::to_rows(p.p_z_given_d));
                CHECK(ll == doctest::Approx(independent).epsilon(1e-10));
                check_rows_normalized(p.p_w_given_z);
                check_rows_normalized(p.p_z_given_d);
                previous = ll;
            });
            const auto& trace = model.meta.objective_trace;
            CHECK(trace.size() == calls + 1);
            for (std::size_t i = 1; i < trace.size(); ++i) {
                CHECK(trace[i] >= trace[i - 1] - 1e-9);
            }
            CHECK_NOTHROW(model.validate());
        }
    }

    TEST_CASE("fit is deterministic per seed")
    {
        const auto corpus = testing::load_fixture_corpus();
        const auto a = fit_plsa(corpus.matrix, config(3, 5, 0.1));
        const auto b = fit_plsa(corpus.matrix, config(3, 5, 0.1));
        CHECK(a.topic_word == b.topic_word);
        CHECK(a.doc_topic == b.doc_topic);
        CHECK(a.meta == b.meta);
        CHECK(a.doc_topic.rows() == corpus.matrix.n_docs());
        CHECK_NOTHROW(a.validate());
    }

    TEST_CASE("early stopping keeps a valid model covering every training document")
    {
        std::mt19937_64 gen(77);
        bool stopped_early = false;
        for (int trial = 0; trial < 10; ++trial) {
            const auto m = DocTermMatrix::from_dense(oracle::random_counts(gen, 20, 15, 3, 0.3));
            auto cfg = config(4, gen(), 0.2);
            cfg.max_iterations = 300;
            cfg.tol = 1e-12;
            const auto model = fit_plsa(m, cfg);
            CHECK(model.doc_topic.rows() == 20);
            CHECK_NOTHROW(model.validate());
            for (const auto& w : model.meta.warnings) {
                stopped_early = stopped_early || w.find("early") != std::string::npos;
            }
        }
        CHECK(stopped_early);
    }

    TEST_CASE("fold-in")
    {
        const auto one = testing::make_model(ModelKind::Plsa, {{0.5, 0.5}});
        const std::vector<TermCount> doc{{0, 2}, {1, 1}};
        CHECK(plsa_fold_in(one, doc, config(1, 1)) == std::vector<double>{1.0});

        const auto three = testing::make_model(ModelKind::Plsa, {{0.5, 0.5, 0.0, 0.0, 0.0, 0.0},
                                                                 {0.0, 0.0, 0.5, 0.5, 0.0, 0.0},
                                                                 {0.0, 0.0, 0.0, 0.0, 0.5, 0.5}});
        const auto before = three.topic_word;
        const std::vector<TermCount> topic2{{4, 3}, {5, 1}};
        const auto theta = plsa_fold_in(three, topic2, config(3, 1));
        CHECK(std::max_element(theta.begin(), theta.end()) - theta.begin() == 2);
        CHECK(std::accumulate(theta.begin(), theta.end(), 0.0) == doctest::Approx(1.0));
        CHECK(three.topic_word == before);

        const auto empty = plsa_fold_in(three, {}, config(3, 1));
        for (double p : empty) {
            CHECK(p == doctest::Approx(1.0 / 3.0));
        }
    }

    TEST_CASE("configuration errors")
    {
        const auto m = DocTermMatrix::from_dense({{1, 2}, {0, 3}});
        CHECK_THROWS_AS(fit_plsa(m, config(0, 1)), std::invalid_argument);
        auto c = config(2, 1);
        c.tol = 0.0;
        CHECK_THROWS_AS(fit_plsa(m, c), std::invalid_argument);
        c = config(2, 1, 0.5);
        CHECK_THROWS_AS(fit_plsa(m, c), std::invalid_argument);
        CHECK_THROWS_AS(fit_plsa(DocTermMatrix{}, config(2, 1)), std::invalid_argument);
    }
}
