#include "topicforge/model_api.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace topicforge {

std::string_view to_string(ModelKind kind)
{
    switch (kind) {
    case ModelKind::Lda:
        return "LDA";
    case ModelKind::Plsa:
        return "PLSA";
    case ModelKind::Nmf:
        break;
    }
    return "NMF";
}

std::optional<ModelKind> parse_model_kind(std::string_view name)
{
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "lda") {
        return ModelKind::Lda;
    }
    if (lower == "plsa") {
        return ModelKind::Plsa;
    }
    if (lower == "nmf") {
        return ModelKind::Nmf;
    }
    return std::nullopt;
}

void TopicModel::validate(double tolerance) const
{
    if (num_topics() < 1) {
        throw std::logic_error("topic model has no topics");
    }
    if (vocab && vocab->size() != topic_word.cols()) {
        throw std::logic_error("topic_word width differs from vocabulary size");
    }
    if (!doc_topic.empty() && doc_topic.cols() != num_topics()) {
        throw std::logic_error("doc_topic width differs from topic count");
    }
    auto check_rows = [tolerance](const Matrix& m, const char* name) {
        for (std::size_t r = 0; r < m.rows(); ++r) {
            double sum = 0.0;
            for (double v : m.row(r)) {
                if (!(v >= 0.0)) {
                    throw std::logic_error(std::string(name) + " has a negative or NaN entry");
                }
                sum += v;
            }
            if (std::abs(sum - 1.0) > tolerance) {
                throw std::logic_error(std::string(name) + " row " + std::to_string(r) +
                                       " sums to " + std::to_string(sum));
            }
        }
    };
    check_rows(topic_word, "topic_word");
    check_rows(doc_topic, "doc_topic");
}

TopicTermRanking top_n_words(const TopicModel& model, std::size_t topic_id, std::size_t n)
{
    if (topic_id >= model.num_topics()) {
        throw std::invalid_argument("topic id " + std::to_string(topic_id) + " out of range (K = " +
                                    std::to_string(model.num_topics()) + ")");
    }
    if (n == 0) {
        throw std::invalid_argument("top_n_words needs n >= 1");
    }
    const auto weights = model.topic_word.row(topic_id);
    std::vector<TermId> ids(weights.size());
    std::iota(ids.begin(), ids.end(), TermId{0});
    n = std::min(n, ids.size());
    std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n), ids.end(),
                      [&](TermId a, TermId b) {
                          if (weights[a] != weights[b]) {
                              return weights[a] > weights[b];
                          }
                          return a < b;
                      });
    TopicTermRanking ranking{topic_id, {}};
    ranking.ranked_terms.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const TermId id = ids[i];
        ranking.ranked_terms.push_back(
            {id, model.vocab ? model.vocab->term(id) : "t" + std::to_string(id), weights[id]});
    }
    return ranking;
}

std::vector<double> predictive_word_dist(const TopicModel& model,
                                         std::span<const double> doc_topic_row)
{
    if (doc_topic_row.size() != model.num_topics()) {
        throw std::invalid_argument("doc-topic row length differs from topic count");
    }
    std::vector<double> dist(model.vocab_size(), 0.0);
    for (std::size_t k = 0; k < model.num_topics(); ++k) {
        const double weight = doc_topic_row[k];
        if (weight == 0.0) {
            continue;
        }
        const auto phi = model.topic_word.row(k);
        for (std::size_t w = 0; w < dist.size(); ++w) {
            dist[w] += weight * phi[w];
        }
    }
    return dist;
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m)
{
    auto rows = nlohmann::json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
    }
    return rows;
}

Matrix matrix_from_json(const nlohmann::json& j, std::size_t cols)
{
    Matrix m(j.size(), cols);
    for (std::size_t r = 0; r < j.size(); ++r) {
        const auto& row = j.at(r);
        if (row.size() != cols) {
            throw std::runtime_error("model file: ragged matrix row " + std::to_string(r));
        }
        for (std::size_t c = 0; c < cols; ++c) {
            m(r, c) = row.at(c).get<double>();
        }
    }
    return m;
}

} // namespace

void write_model(std::ostream& out, const TopicModel& model)
{
    nlohmann::ordered_json j;
    j["kind"] = to_string(model.kind);
    j["K"] = model.num_topics();
    j["seed"] = model.meta.seed;
    j["iterations"] = model.meta.iterations;
    j["objective"] = model.meta.objective;
    j["warnings"] = model.meta.warnings;
    if (model.vocab) {
        j["vocabulary"] = model.vocab->terms();
        std::vector<std::size_t> df;
        for (TermId t = 0; t < model.vocab->size(); ++t) {
            df.push_back(model.vocab->doc_freq(t));
        }
        j["doc_freq"] = df;
    }
    j["topic_word"] = matrix_to_json(model.topic_word);
    j["doc_topic"] = matrix_to_json(model.doc_topic);
    out << j.dump(1) << '\n';
}

TopicModel read_model(std::istream& in)
{
    const auto j = nlohmann::json::parse(in);
    TopicModel model;
    auto kind = parse_model_kind(j.at("kind").get<std::string>());
    if (!kind) {
        throw std::runtime_error("model file: unknown kind");
    }
    model.kind = *kind;
    model.meta.seed = j.at("seed").get<std::uint64_t>();
    model.meta.iterations = j.value("iterations", std::size_t{0});
    model.meta.objective = j.value("objective", 0.0);
    model.meta.warnings = j.value("warnings", std::vector<std::string>{});
    const auto k = j.at("K").get<std::size_t>();

    std::size_t cols = 0;
    if (j.contains("vocabulary")) {
        auto terms = j.at("vocabulary").get<std::vector<std::string>>();
        auto df = j.value("doc_freq", std::vector<std::size_t>(terms.size(), 0));
        cols = terms.size();
        model.vocab = std::make_shared<Vocabulary>(std::move(terms), std::move(df));
    } else if (!j.at("topic_word").empty()) {
        cols = j.at("topic_word").at(0).size();
    }
    model.topic_word = matrix_from_json(j.at("topic_word"), cols);
    model.doc_topic = matrix_from_json(j.at("doc_topic"), k);
    if (model.topic_word.rows() != k) {
        throw std::runtime_error("model file: K does not match topic_word rows");
    }
    return model;
}

} // namespace topicforge
