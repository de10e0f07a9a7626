#pragma once

#include "topicforge/ingest.hpp"

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace topicforge {

struct TokenizedDoc
{
    std::size_t record_id = 0;
    std::vector<std::string> tokens;

    bool operator==(const TokenizedDoc&) const = default;
};

enum class StopwordSource { BuiltinGeneral, AviationExtension, UserFile };

class StopwordList
{
public:
    StopwordList() = default;
    StopwordList(std::unordered_set<std::string> words, StopwordSource source);

    /// One token per line, '#' starts a comment, surrounding whitespace ignored.
    /// Entries are lowercased; entries with non-letters throw ConfigError.
    static StopwordList parse(std::istream& in, StopwordSource source);
    static StopwordList load(const std::filesystem::path& path, StopwordSource source);

    static StopwordList builtin_general();
    static StopwordList builtin_aviation();
    /// General list merged with the (empty by default) aviation extension.
    static StopwordList builtin();

    void merge(const StopwordList& other);

    bool contains(const std::string& token) const { return words_.contains(token); }
    std::size_t size() const noexcept { return words_.size(); }
    const std::set<StopwordSource>& sources() const noexcept { return sources_; }

private:
    std::unordered_set<std::string> words_;
    std::set<StopwordSource> sources_;
};

struct SuffixRule
{
    std::string suffix;
    std::string replacement;
    bool dictionary_check = true;
};

/// Dictionary-plus-suffix-rules lemmatizer.
///
/// One reduction step looks the token up in the exceptions table, then tries
/// the suffix rules in order and takes the first image of at least
/// kMinLemmaLength letters that is in the word list; otherwise the token is
/// kept. lemma() repeats the step until nothing changes (e.g. "dressings" ->
/// "dressing" -> "dress"), so every output is a fixed point and lemmatizing
/// twice is the same as lemmatizing once.
inline constexpr std::size_t kMinLemmaLength = 3;
inline constexpr std::size_t kMaxLemmaSteps = 16;

class LemmaLexicon
{
public:
    LemmaLexicon() = default;
    /// Throws ConfigError if an exception maps to a non-fixed-point lemma.
    LemmaLexicon(std::unordered_map<std::string, std::string> exceptions,
                 std::vector<SuffixRule> rules, std::unordered_set<std::string> wordlist);

    static std::vector<SuffixRule> default_rules();
    static LemmaLexicon builtin();
    static LemmaLexicon load(const std::filesystem::path& exceptions_path,
                             const std::filesystem::path& wordlist_path);

    /// `token<TAB>lemma` lines; '#' comments.
    static std::unordered_map<std::string, std::string> parse_exceptions(std::istream& in);
    /// One word per line; '#' comments.
    static std::unordered_set<std::string> parse_wordlist(std::istream& in);

    std::string lemma(const std::string& token) const;
    std::string reduce_once(const std::string& token) const;

    bool is_base_form(const std::string& word) const;

    const std::unordered_map<std::string, std::string>& exceptions() const { return exceptions_; }
    const std::vector<SuffixRule>& rules() const { return rules_; }

private:
    std::unordered_map<std::string, std::string> exceptions_;
    std::vector<SuffixRule> rules_;
    std::unordered_set<std::string> wordlist_;
};

/// Lowercases ASCII letters, collapses every run of non-letters to one space
/// and trims. Bytes outside a-z/A-Z (including UTF-8 sequences) count as
/// non-letters.
std::string clean_text(std::string_view raw);

std::vector<std::string> tokenize(std::string_view clean);

std::vector<std::string> remove_stopwords(std::span<const std::string> tokens,
                                          const StopwordList& stoplist);

std::vector<std::string> lemmatize(std::span<const std::string> tokens,
                                   const LemmaLexicon& lexicon);

enum class ExclusionReason { EmptyNarrative, BelowMinTokens, VocabularyEmpty };

std::string_view to_string(ExclusionReason reason);

struct Exclusion
{
    std::size_t record_id = 0;
    ExclusionReason reason = ExclusionReason::EmptyNarrative;

    bool operator==(const Exclusion&) const = default;
};

/// clean -> tokenize -> stopwords -> lemmatize, then a second stopword pass
/// over the lemmas. Documents with fewer than `min_tokens` surviving tokens
/// are dropped and, when `excluded` is given, logged there.
std::vector<TokenizedDoc> preprocess_corpus(std::span<const AccidentRecord> records,
                                            const StopwordList& stoplist,
                                            const LemmaLexicon& lexicon,
                                            std::size_t min_tokens = 3,
                                            std::vector<Exclusion>* excluded = nullptr);

} // namespace topicforge
