#pragma once

#include "topicforge/eval_metrics.hpp"
#include "topicforge/ingest.hpp"
#include "topicforge/model_api.hpp"
#include "topicforge/textprep.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace topicforge {

/// Every pipeline setting as a flat key/value table. Values are normalized on
/// assignment (surrounding blanks trimmed, list items trimmed and re-joined
/// with ','), so equal settings serialize identically. Typed accessors parse
/// on demand and throw ConfigError on malformed values.
class PipelineConfig
{
public:
    struct KeyInfo
    {
        std::string_view key;
        std::string_view default_value;
        std::string_view help;
    };

    /// All known keys with defaults, in a fixed order.
    static const std::vector<KeyInfo>& keys();

    PipelineConfig();

    /// `key = value` lines; '#' starts a comment line. Unknown keys throw.
    static PipelineConfig parse(std::istream& in);
    static PipelineConfig load(const std::filesystem::path& path);

    void set(std::string_view key, std::string_view value);
    const std::string& get(std::string_view key) const;
    const std::map<std::string, std::string, std::less<>>& values() const noexcept { return values_; }

    /// Sorted `key=value` lines.
    std::string canonical() const;
    /// FNV-1a 64 of canonical(), as 16 hex digits.
    std::string hash() const;

    /// Parses every typed field and checks that referenced files exist.
    void validate() const;

    std::filesystem::path input_path() const;
    ColumnMap column_map() const;
    /// nullopt for `all`.
    std::optional<OperatorCategory> category() const;
    CategoryRules category_rules() const;
    StopwordList stoplist() const;
    LemmaLexicon lexicon() const;
    std::size_t min_tokens() const;
    std::size_t min_df() const;
    double max_df() const;
    double split_ratio() const;
    std::uint64_t seed() const;
    std::vector<ModelKind> models() const;
    std::vector<std::size_t> ks() const;
    /// Model settings with every seed set to seed().
    ModelConfigs model_configs() const;
    CoherenceVariant coherence_variant() const;
    std::size_t top_n() const;
    double perplexity_epsilon() const;
    std::size_t wordcloud_n() const;
    std::filesystem::path out_dir() const;
    std::size_t threads() const;
    bool reproducible() const;
    bool dump_matrix() const;

private:
    std::size_t get_size(std::string_view key) const;
    double get_double(std::string_view key) const;
    bool get_bool(std::string_view key) const;
    std::vector<std::string> get_list(std::string_view key) const;

    std::map<std::string, std::string, std::less<>> values_;
};

} // namespace topicforge
