#include "topicforge/pipeline_config.hpp"

#include "topicforge/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace topicforge {

namespace {

const std::set<std::string_view> kListKeys{"military_keywords", "private_keywords", "models", "ks"};

std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view s)
{
    std::vector<std::string> items;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        const auto end = comma == std::string_view::npos ? s.size() : comma;
        auto item = trim(s.substr(start, end - start));
        if (!item.empty()) {
            items.push_back(std::move(item));
        }
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return items;
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::uint64_t parse_u64(std::string_view key, std::string_view text)
{
    std::uint64_t v = 0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (text.empty() || res.ec != std::errc{} || res.ptr != end) {
        throw ConfigError("config key '" + std::string(key) + "': expected a non-negative integer, got '" +
                          std::string(text) + "'");
    }
    return v;
}

} // namespace

const std::vector<PipelineConfig::KeyInfo>& PipelineConfig::keys()
{
    static const std::vector<KeyInfo> table{
        {"input", "", "CSV file with one accident record per row"},
        {"column_operator", "Operator", "header of the operator column"},
        {"column_narrative", "Summary", "header of the narrative column"},
        {"column_date", "Date", "header of the date column"},
        {"category", "all", "operator category filter: all|military|commercial|private|unknown"},
        {"military_keywords", "military,air force,navy,army,marine,royal air",
         "operator substrings that mark a military operator"},
        {"private_keywords", "private", "operator substrings that mark a private operator"},
        {"stopwords", "", "general stopword file (empty: built-in list)"},
        {"aviation_stopwords", "", "extra domain stopword file merged into the general list"},
        {"lemma_exceptions", "", "irregular-form table, token<TAB>lemma (empty: built-in)"},
        {"wordlist", "", "base-form word list (empty: built-in)"},
        {"min_tokens", "3", "drop documents with fewer tokens after preprocessing"},
        {"min_df", "2", "minimum document frequency of a vocabulary term"},
        {"max_df", "0.5", "maximum document-frequency fraction of a vocabulary term"},
        {"split_ratio", "0.8", "fraction of documents used for training"},
        {"seed", "42", "seed for the split and every model"},
        {"models", "lda,plsa,nmf", "models to fit"},
        {"ks", "5,10,15,20", "topic counts to sweep"},
        {"lda_alpha", "auto", "document-topic prior (auto: 50/K)"},
        {"lda_beta", "0.01", "topic-word prior"},
        {"lda_iterations", "1000", "Gibbs sweeps"},
        {"lda_burn_in", "500", "sweeps discarded before averaging"},
        {"lda_thin", "10", "averaging interval after burn-in"},
        {"plsa_max_iterations", "500", "EM iteration cap"},
        {"plsa_tol", "1e-6", "relative log-likelihood change that stops EM"},
        {"plsa_early_stop_fraction", "0.1", "training fraction held out for early stopping (0: off)"},
        {"plsa_fold_in_max_iterations", "200", "EM iterations when folding in a held-out document"},
        {"nmf_max_iterations", "500", "multiplicative-update iteration cap"},
        {"nmf_tol", "1e-4", "relative objective change that stops NMF"},
        {"coherence", "npmi", "coherence variant used to select K: npmi|umass"},
        {"top_n", "10", "top words per topic for coherence and tables"},
        {"perplexity_epsilon", "1e-12", "additive smoothing inside the perplexity log"},
        {"wordcloud_n", "50", "terms per word-cloud export"},
        {"out", "topicforge_out", "output directory"},
        {"threads", "1", "worker threads for the K sweep"},
        {"reproducible", "false", "zero timings so outputs are byte-stable"},
        {"dump_matrix", "false", "also write the document-term matrix and vocabulary"},
    };
    return table;
}

PipelineConfig::PipelineConfig()
{
    for (const auto& k : keys()) {
        values_.emplace(std::string(k.key), std::string(k.default_value));
    }
}

PipelineConfig PipelineConfig::parse(std::istream& in)
{
    PipelineConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty() || text.front() == '#') {
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        config.set(trim(std::string_view(text).substr(0, eq)),
                   std::string_view(text).substr(eq + 1));
    }
    return config;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path.string() + "'");
    }
    return parse(in);
}

void PipelineConfig::set(std::string_view key, std::string_view value)
{
    const auto it = values_.find(key);
    if (it == values_.end()) {
        throw ConfigError("unknown config key '" + std::string(key) + "'");
    }
    if (kListKeys.count(key) != 0) {
        std::string joined;
        for (const auto& item : split_list(value)) {
            if (!joined.empty()) {
                joined += ',';
            }
            joined += item;
        }
        it->second = joined;
    } else {
        it->second = trim(value);
    }
}

const std::string& PipelineConfig::get(std::string_view key) const
{
    const auto it = values_.find(key);
    if (it == values_.end()) {
        throw ConfigError("unknown config key '" + std::string(key) + "'");
    }
    return it->second;
}

std::string PipelineConfig::canonical() const
{
    std::string out;
    for (const auto& [k, v] : values_) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

std::string PipelineConfig::hash() const
{
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::size_t PipelineConfig::get_size(std::string_view key) const
{
    return static_cast<std::size_t>(parse_u64(key, get(key)));
}

double PipelineConfig::get_double(std::string_view key) const
{
    const auto& text = get(key);
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (text.empty() || res.ec != std::errc{} || res.ptr != end) {
        throw ConfigError("config key '" + std::string(key) + "': expected a number, got '" + text + "'");
    }
    return v;
}

bool PipelineConfig::get_bool(std::string_view key) const
{
    const auto text = lower(get(key));
    if (text == "true" || text == "1" || text == "yes" || text == "on") {
        return true;
    }
    if (text == "false" || text == "0" || text == "no" || text == "off") {
        return false;
    }
    throw ConfigError("config key '" + std::string(key) + "': expected true or false, got '" + text + "'");
}

std::vector<std::string> PipelineConfig::get_list(std::string_view key) const
{
    return split_list(get(key));
}

std::filesystem::path PipelineConfig::input_path() const
{
    return get("input");
}

ColumnMap PipelineConfig::column_map() const
{
    ColumnMap map;
    map.operator_column = get("column_operator");
    map.narrative_column = get("column_narrative");
    map.date_column = get("column_date");
    return map;
}

std::optional<OperatorCategory> PipelineConfig::category() const
{
    const auto name = lower(get("category"));
    if (name == "all") {
        return std::nullopt;
    }
    const auto parsed = parse_category(name);
    if (!parsed) {
        throw ConfigError("unknown category '" + name + "'");
    }
    return parsed;
}

CategoryRules PipelineConfig::category_rules() const
{
    CategoryRules rules;
    for (auto& kw : get_list("military_keywords")) {
        rules.military_keywords.push_back(lower(std::move(kw)));
    }
    for (auto& kw : get_list("private_keywords")) {
        rules.private_keywords.push_back(lower(std::move(kw)));
    }
    rules.validate();
    return rules;
}

StopwordList PipelineConfig::stoplist() const
{
    const auto& general = get("stopwords");
    const auto& aviation = get("aviation_stopwords");
    StopwordList list = general.empty()
                            ? StopwordList::builtin_general()
                            : StopwordList::load(general, StopwordSource::UserFile);
    list.merge(aviation.empty() ? StopwordList::builtin_aviation()
                                : StopwordList::load(aviation, StopwordSource::AviationExtension));
    return list;
}

LemmaLexicon PipelineConfig::lexicon() const
{
    const auto& exceptions = get("lemma_exceptions");
    const auto& wordlist = get("wordlist");
    if (exceptions.empty() && wordlist.empty()) {
        return LemmaLexicon::builtin();
    }
    if (exceptions.empty() || wordlist.empty()) {
        throw ConfigError("lemma_exceptions and wordlist must be given together");
    }
    return LemmaLexicon::load(exceptions, wordlist);
}

std::size_t PipelineConfig::min_tokens() const { return get_size("min_tokens"); }
std::size_t PipelineConfig::min_df() const { return get_size("min_df"); }
double PipelineConfig::max_df() const { return get_double("max_df"); }
double PipelineConfig::split_ratio() const { return get_double("split_ratio"); }
std::uint64_t PipelineConfig::seed() const { return parse_u64("seed", get("seed")); }

std::vector<ModelKind> PipelineConfig::models() const
{
    std::vector<ModelKind> kinds;
    for (const auto& name : get_list("models")) {
        const auto kind = parse_model_kind(name);
        if (!kind) {
            throw ConfigError("unknown model '" + name + "'");
        }
        if (std::find(kinds.begin(), kinds.end(), *kind) != kinds.end()) {
            throw ConfigError("model '" + name + "' listed twice");
        }
        kinds.push_back(*kind);
    }
    if (kinds.empty()) {
        throw ConfigError("no models selected");
    }
    return kinds;
}

std::vector<std::size_t> PipelineConfig::ks() const
{
    std::vector<std::size_t> values;
    for (const auto& item : get_list("ks")) {
        const auto k = static_cast<std::size_t>(parse_u64("ks", item));
        if (k < 1) {
            throw ConfigError("every K must be at least 1");
        }
        if (std::find(values.begin(), values.end(), k) != values.end()) {
            throw ConfigError("K = " + item + " listed twice");
        }
        values.push_back(k);
    }
    if (values.empty()) {
        throw ConfigError("ks must list at least one topic count");
    }
    return values;
}

ModelConfigs PipelineConfig::model_configs() const
{
    ModelConfigs c;
    const auto s = seed();

    const auto alpha = lower(get("lda_alpha"));
    if (alpha != "auto") {
        c.lda.alpha = get_double("lda_alpha");
    }
    c.lda.beta = get_double("lda_beta");
    c.lda.iterations = get_size("lda_iterations");
    c.lda.burn_in = get_size("lda_burn_in");
    c.lda.thin = get_size("lda_thin");
    c.lda.seed = s;

    c.plsa.max_iterations = get_size("plsa_max_iterations");
    c.plsa.tol = get_double("plsa_tol");
    c.plsa.early_stop_fraction = get_double("plsa_early_stop_fraction");
    c.plsa.fold_in_max_iterations = get_size("plsa_fold_in_max_iterations");
    c.plsa.seed = s;

    c.nmf.max_iterations = get_size("nmf_max_iterations");
    c.nmf.tol = get_double("nmf_tol");
    c.nmf.seed = s;
    return c;
}

CoherenceVariant PipelineConfig::coherence_variant() const
{
    const auto name = lower(get("coherence"));
    const auto v = parse_coherence_variant(name);
    if (!v) {
        throw ConfigError("unknown coherence variant '" + name + "'");
    }
    return *v;
}

std::size_t PipelineConfig::top_n() const { return get_size("top_n"); }
double PipelineConfig::perplexity_epsilon() const { return get_double("perplexity_epsilon"); }
std::size_t PipelineConfig::wordcloud_n() const { return get_size("wordcloud_n"); }
std::filesystem::path PipelineConfig::out_dir() const { return get("out"); }
std::size_t PipelineConfig::threads() const { return get_size("threads"); }
bool PipelineConfig::reproducible() const { return get_bool("reproducible"); }
bool PipelineConfig::dump_matrix() const { return get_bool("dump_matrix"); }

void PipelineConfig::validate() const
{
    if (get("input").empty()) {
        throw ConfigError("no input file given");
    }
    for (const auto* key : {"input", "stopwords", "aviation_stopwords", "lemma_exceptions", "wordlist"}) {
        const auto& path = get(key);
        if (!path.empty() && !std::filesystem::is_regular_file(path)) {
            throw ConfigError(std::string(key) + " file '" + path + "' does not exist");
        }
    }
    if (get("lemma_exceptions").empty() != get("wordlist").empty()) {
        throw ConfigError("lemma_exceptions and wordlist must be given together");
    }
    (void)category();
    (void)category_rules();
    if (min_tokens() < 1) {
        throw ConfigError("min_tokens must be at least 1");
    }
    if (min_df() < 1) {
        throw ConfigError("min_df must be at least 1");
    }
    const double mdf = max_df();
    if (!(mdf > 0.0 && mdf <= 1.0)) {
        throw ConfigError("max_df must be in (0, 1]");
    }
    const double ratio = split_ratio();
    if (!(ratio > 0.0 && ratio <= 1.0)) {
        throw ConfigError("split_ratio must be in (0, 1]");
    }
    (void)seed();
    (void)models();
    (void)ks();
    const auto mc = model_configs();
    try {
        mc.lda.validate();
        mc.plsa.validate();
        mc.nmf.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    (void)coherence_variant();
    if (top_n() < 1) {
        throw ConfigError("top_n must be at least 1");
    }
    if (!(perplexity_epsilon() >= 0.0)) {
        throw ConfigError("perplexity_epsilon must be non-negative");
    }
    if (wordcloud_n() < 1) {
        throw ConfigError("wordcloud_n must be at least 1");
    }
    if (get("out").empty()) {
        throw ConfigError("out must name a directory");
    }
    (void)threads();
    (void)reproducible();
    (void)dump_matrix();
}

} // namespace topicforge
