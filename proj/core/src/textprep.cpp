#include "topicforge/textprep.hpp"

#include "topicforge/errors.hpp"
#include "topicforge/resources.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace topicforge {

namespace {

bool is_letter(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

std::string_view trim(std::string_view s)
{
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) {
        return {};
    }
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

bool is_lowercase_word(std::string_view s)
{
    if (s.empty()) {
        return false;
    }
    for (unsigned char c : s) {
        if (c < 'a' || c > 'z') {
            return false;
        }
    }
    return true;
}

// Calls fn(line) for each non-empty, non-comment line with whitespace trimmed.
template <typename Fn>
void for_each_entry(std::istream& in, Fn&& fn)
{
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        auto view = trim(line);
        if (view.empty() || view.front() == '#') {
            continue;
        }
        fn(view, number);
    }
}

std::ifstream open_or_throw(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open " + path.string());
    }
    return in;
}

} // namespace

StopwordList::StopwordList(std::unordered_set<std::string> words, StopwordSource source)
    : words_(std::move(words)), sources_{source}
{
    for (const auto& w : words_) {
        if (!is_lowercase_word(w)) {
            throw ConfigError("stopword '" + w + "' is not a lowercase word");
        }
    }
}

StopwordList StopwordList::parse(std::istream& in, StopwordSource source)
{
    std::unordered_set<std::string> words;
    for_each_entry(in, [&](std::string_view entry, std::size_t line) {
        std::string word = clean_text(entry);
        if (!is_lowercase_word(word) || word.size() != entry.size()) {
            throw ConfigError("stopword file line " + std::to_string(line) +
                              ": expected a single word, got '" + std::string(entry) + "'");
        }
        words.insert(std::move(word));
    });
    return StopwordList(std::move(words), source);
}

StopwordList StopwordList::load(const std::filesystem::path& path, StopwordSource source)
{
    auto in = open_or_throw(path);
    return parse(in, source);
}

StopwordList StopwordList::builtin_general()
{
    std::istringstream in{std::string(resources::english_stopwords_text())};
    return parse(in, StopwordSource::BuiltinGeneral);
}

StopwordList StopwordList::builtin_aviation()
{
    std::istringstream in{std::string(resources::aviation_stopwords_text())};
    return parse(in, StopwordSource::AviationExtension);
}

StopwordList StopwordList::builtin()
{
    auto list = builtin_general();
    list.merge(builtin_aviation());
    return list;
}

void StopwordList::merge(const StopwordList& other)
{
    words_.insert(other.words_.begin(), other.words_.end());
    sources_.insert(other.sources_.begin(), other.sources_.end());
}

LemmaLexicon::LemmaLexicon(std::unordered_map<std::string, std::string> exceptions,
                           std::vector<SuffixRule> rules,
                           std::unordered_set<std::string> wordlist)
    : exceptions_(std::move(exceptions)), rules_(std::move(rules)), wordlist_(std::move(wordlist))
{
    std::vector<std::string> targets;
    for (const auto& [token, target] : exceptions_) {
        if (!is_lowercase_word(token) || !is_lowercase_word(target)) {
            throw ConfigError("lemma exception '" + token + "' -> '" + target +
                              "' is not a pair of lowercase words");
        }
        targets.push_back(target);
    }
    // An exception target is a declared lemma, so the suffix rules must not reduce it further.
    for (const auto& target : targets) {
        exceptions_.try_emplace(target, target);
    }
    for (const auto& [token, target] : exceptions_) {
        if (lemma(target) != target) {
            throw ConfigError("lemma exception '" + token + "' -> '" + target +
                              "': target is not a base form (maps to '" + lemma(target) + "')");
        }
    }
    for (const auto& rule : rules_) {
        if (rule.suffix.empty()) {
            throw ConfigError("suffix rule with empty suffix");
        }
    }
}

std::vector<SuffixRule> LemmaLexicon::default_rules()
{
    return {{"ies", "y"}, {"ing", ""}, {"ing", "e"}, {"ed", ""},
            {"ed", "e"},  {"es", ""},  {"s", ""}};
}

std::unordered_map<std::string, std::string> LemmaLexicon::parse_exceptions(std::istream& in)
{
    std::unordered_map<std::string, std::string> table;
    for_each_entry(in, [&](std::string_view entry, std::size_t line) {
        const auto tab = entry.find('\t');
        if (tab == std::string_view::npos) {
            throw ConfigError("lemma exceptions line " + std::to_string(line) +
                              ": expected token<TAB>lemma");
        }
        table.insert_or_assign(std::string(trim(entry.substr(0, tab))),
                               std::string(trim(entry.substr(tab + 1))));
    });
    return table;
}

std::unordered_set<std::string> LemmaLexicon::parse_wordlist(std::istream& in)
{
    std::unordered_set<std::string> words;
    for_each_entry(in, [&](std::string_view entry, std::size_t) { words.emplace(entry); });
    return words;
}

LemmaLexicon LemmaLexicon::builtin()
{
    std::istringstream exc{std::string(resources::lemma_exceptions_text())};
    std::istringstream words{std::string(resources::wordlist_text())};
    return LemmaLexicon(parse_exceptions(exc), default_rules(), parse_wordlist(words));
}

LemmaLexicon LemmaLexicon::load(const std::filesystem::path& exceptions_path,
                                const std::filesystem::path& wordlist_path)
{
    auto exc = open_or_throw(exceptions_path);
    auto words = open_or_throw(wordlist_path);
    return LemmaLexicon(parse_exceptions(exc), default_rules(), parse_wordlist(words));
}

bool LemmaLexicon::is_base_form(const std::string& word) const
{
    if (!wordlist_.contains(word)) {
        return false;
    }
    auto it = exceptions_.find(word);
    return it == exceptions_.end() || it->second == word;
}

std::string LemmaLexicon::reduce_once(const std::string& token) const
{
    if (auto it = exceptions_.find(token); it != exceptions_.end()) {
        return it->second;
    }
    for (const auto& rule : rules_) {
        if (token.size() <= rule.suffix.size() || !token.ends_with(rule.suffix)) {
            continue;
        }
        std::string candidate = token.substr(0, token.size() - rule.suffix.size()) + rule.replacement;
        if (candidate.size() < kMinLemmaLength) {
            continue;
        }
        if (!rule.dictionary_check || is_base_form(candidate)) {
            return candidate;
        }
    }
    return token;
}

std::string LemmaLexicon::lemma(const std::string& token) const
{
    std::string current = token;
    for (std::size_t step = 0; step < kMaxLemmaSteps; ++step) {
        std::string next = reduce_once(current);
        if (next == current) {
            break;
        }
        current = std::move(next);
    }
    return current;
}

std::string clean_text(std::string_view raw)
{
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (unsigned char c : raw) {
        if (is_letter(c)) {
            if (pending_space && !out.empty()) {
                out.push_back(' ');
            }
            pending_space = false;
            out.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c));
        } else {
            pending_space = true;
        }
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view clean)
{
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < clean.size()) {
        while (i < clean.size() && std::isspace(static_cast<unsigned char>(clean[i]))) {
            ++i;
        }
        const std::size_t start = i;
        while (i < clean.size() && !std::isspace(static_cast<unsigned char>(clean[i]))) {
            ++i;
        }
        if (i > start) {
            tokens.emplace_back(clean.substr(start, i - start));
        }
    }
    return tokens;
}

std::vector<std::string> remove_stopwords(std::span<const std::string> tokens,
                                          const StopwordList& stoplist)
{
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
        if (!stoplist.contains(t)) {
            out.push_back(t);
        }
    }
    return out;
}

std::vector<std::string> lemmatize(std::span<const std::string> tokens, const LemmaLexicon& lexicon)
{
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
        out.push_back(lexicon.lemma(t));
    }
    return out;
}

std::string_view to_string(ExclusionReason reason)
{
    switch (reason) {
    case ExclusionReason::EmptyNarrative:
        return "empty_narrative";
    case ExclusionReason::BelowMinTokens:
        return "below_min_tokens";
    case ExclusionReason::VocabularyEmpty:
        break;
    }
    return "vocab_empty";
}

std::vector<TokenizedDoc> preprocess_corpus(std::span<const AccidentRecord> records,
                                            const StopwordList& stoplist,
                                            const LemmaLexicon& lexicon, std::size_t min_tokens,
                                            std::vector<Exclusion>* excluded)
{
    if (min_tokens < 1) {
        throw std::invalid_argument("min_tokens must be at least 1");
    }
    std::vector<TokenizedDoc> docs;
    for (const auto& record : records) {
        const std::string clean = clean_text(record.narrative);
        if (clean.empty()) {
            if (excluded) {
                excluded->push_back({record.record_id, ExclusionReason::EmptyNarrative});
            }
            continue;
        }
        auto tokens = remove_stopwords(lemmatize(remove_stopwords(tokenize(clean), stoplist), lexicon),
                                       stoplist);
        if (tokens.size() < min_tokens) {
            if (excluded) {
                excluded->push_back({record.record_id, ExclusionReason::BelowMinTokens});
            }
            continue;
        }
        docs.push_back({record.record_id, std::move(tokens)});
    }
    return docs;
}

} // namespace topicforge
