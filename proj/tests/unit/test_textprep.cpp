#include "test_helpers.hpp"

#include "topicforge/errors.hpp"
#include "topicforge/textprep.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

using namespace topicforge;

namespace {

using Tokens = std::vector<std::string>;

const LemmaLexicon& lexicon()
{
    static const LemmaLexicon lex = LemmaLexicon::builtin();
    return lex;
}

const StopwordList& stoplist()
{
    static const StopwordList list = StopwordList::builtin();
    return list;
}

std::string join(const Tokens& tokens)
{
    std::string s;
    for (const auto& t : tokens) {
        if (!s.empty()) {
            s += ' ';
        }
        s += t;
    }
    return s;
}

Tokens preprocess_text(const std::string& text, std::size_t min_tokens = 1)
{
    AccidentRecord r;
    r.narrative = text;
    const std::vector<AccidentRecord> records{r};
    const auto docs = preprocess_corpus(records, stoplist(), lexicon(), min_tokens);
    return docs.empty() ? Tokens{} : docs.front().tokens;
}

} // namespace

TEST_SUITE("textprep")
{
    TEST_CASE("clean_text")
    {
        CHECK(clean_text("Crashed at 3,000 ft!") == "crashed at ft");
        CHECK(clean_text("") == "");
        CHECK(clean_text("ENGINE failure #2") == "engine failure");
        CHECK(clean_text("  --  ") == "");
        CHECK(clean_text("caf\xC3\xA9 au lait") == "caf au lait");
        CHECK(clean_text("pilot's") == "pilot s");
    }

    TEST_CASE("tokenize")
    {
        CHECK(tokenize("engine failure") == Tokens{"engine", "failure"});
        CHECK(tokenize("   ").empty());
        CHECK(tokenize("pilot error pilot") == Tokens{"pilot", "error", "pilot"});
    }

    TEST_CASE("remove_stopwords")
    {
        CHECK(remove_stopwords(Tokens{"the", "engine", "failed"}, stoplist()) == Tokens{"engine", "failed"});
        CHECK(remove_stopwords(Tokens{}, stoplist()).empty());
        CHECK(remove_stopwords(Tokens{"the", "and", "of"}, stoplist()).empty());
    }

    TEST_CASE("aviation topic words are not stopwords by default")
    {
        for (const char* w : {"plane", "crash", "aircraft", "engine", "pilot", "landing", "weather",
                              "failure", "emergency", "fuel", "runway", "flight", "terrain", "approach"}) {
            CHECK_MESSAGE(!stoplist().contains(w), w);
        }
        CHECK(StopwordList::builtin_aviation().size() == 0);
    }

    TEST_CASE("lemmatize examples")
    {
        CHECK(lemmatize(Tokens{"flying"}, lexicon()) == Tokens{"fly"});
        CHECK(lemmatize(Tokens{"fly"}, lexicon()) == Tokens{"fly"});
        CHECK(lemmatize(Tokens{"crashed"}, lexicon()) == Tokens{"crash"});
        CHECK(lemmatize(Tokens{"engines", "pilots", "landed", "injuries", "taking"}, lexicon()) ==
              Tokens{"engine", "pilot", "land", "injury", "take"});
        CHECK(lemmatize(Tokens{"crashes", "descended", "approaching"}, lexicon()) ==
              Tokens{"crash", "descend", "approach"});
        CHECK(lemmatize(Tokens{"xyzzyqs"}, lexicon()) == Tokens{"xyzzyqs"});
    }

    TEST_CASE("pinned words and short stems stay unchanged")
    {
        CHECK(lemmatize(Tokens{"news", "ceiling", "gas", "during", "wing"}, lexicon()) ==
              Tokens{"news", "ceiling", "gas", "during", "wing"});
    }

    TEST_CASE("suffix rules repeat until nothing changes")
    {
        CHECK(lexicon().lemma("landing") == "land");
        CHECK(lexicon().lemma("dressings") == "dress");
        CHECK(lexicon().reduce_once("dressings") == "dressing");
    }

    TEST_CASE("exception targets are pinned as lemmas")
    {
        std::unordered_map<std::string, std::string> exceptions{{"genera", "genus"}};
        std::unordered_set<std::string> words{"genus", "genu"};
        const LemmaLexicon lex(exceptions, LemmaLexicon::default_rules(), words);
        CHECK(lex.lemma("genera") == "genus");
        CHECK(lex.lemma("genus") == "genus");
    }

    TEST_CASE("lemma outputs are fixed points")
    {
        std::mt19937_64 gen(11);
        const std::string letters = "abcdefghijklmnopqrstuvwxyz";
        std::uniform_int_distribution<std::size_t> pick(0, letters.size() - 1);
        std::uniform_int_distribution<std::size_t> len(1, 9);
        const char* suffixes[] = {"", "s", "es", "ed", "ing", "ies"};
        std::uniform_int_distribution<std::size_t> suf(0, 5);
        Tokens tokens;
        for (int i = 0; i < 3000; ++i) {
            std::string w;
            for (std::size_t n = len(gen); n > 0; --n) {
                w += letters[pick(gen)];
            }
            tokens.push_back(w + suffixes[suf(gen)]);
        }
        for (const auto& [from, to] : lexicon().exceptions()) {
            tokens.push_back(from);
            tokens.push_back(to);
        }
        const auto once = lemmatize(tokens, lexicon());
        REQUIRE(once.size() == tokens.size());
        CHECK(lemmatize(once, lexicon()) == once);
    }

    TEST_CASE("lemma outputs come from exceptions, suffix-rule images or the input")
    {
        for (const std::string token : {"flying", "crashed", "runways", "ran", "geese", "stopping", "zzzs"}) {
            const auto out = lexicon().lemma(token);
            bool allowed = out == token;
            if (auto it = lexicon().exceptions().find(token); it != lexicon().exceptions().end()) {
                allowed = allowed || out == it->second;
            }
            for (const auto& rule : lexicon().rules()) {
                if (token.size() > rule.suffix.size() && token.ends_with(rule.suffix)) {
                    allowed = allowed ||
                              out == token.substr(0, token.size() - rule.suffix.size()) + rule.replacement;
                }
            }
            CHECK_MESSAGE(allowed, token << " -> " << out);
        }
    }

    TEST_CASE("lexicon rejects exceptions that map to non-fixed points")
    {
        std::unordered_map<std::string, std::string> exceptions{{"went", "goes"}, {"goes", "go"}};
        std::unordered_set<std::string> words{"go"};
        CHECK_THROWS_AS(LemmaLexicon(exceptions, LemmaLexicon::default_rules(), words), ConfigError);
    }

    TEST_CASE("stopword and lexicon file parsing")
    {
        std::istringstream stop("# comment\n  Alpha \n\nbeta\n");
        const auto list = StopwordList::parse(stop, StopwordSource::UserFile);
        CHECK(list.contains("alpha"));
        CHECK(list.contains("beta"));
        CHECK(list.size() == 2);

        std::istringstream exc("# irregulars\nflew\tfly\n");
        const auto table = LemmaLexicon::parse_exceptions(exc);
        CHECK(table.at("flew") == "fly");

        std::istringstream bad("flew fly\n");
        CHECK_THROWS_AS(LemmaLexicon::parse_exceptions(bad), ConfigError);
    }

    TEST_CASE("preprocess_corpus examples")
    {
        CHECK(preprocess_text("The plane crashed.") == Tokens{"plane", "crash"});

        std::vector<AccidentRecord> records(3);
        records[0].record_id = 10;
        records[0].narrative = "";
        records[1].record_id = 11;
        records[1].narrative = "The plane crashed.";
        records[2].record_id = 12;
        records[2].narrative = "Engine failure during the approach; pilots crashed short of the runway.";
        std::vector<Exclusion> excluded;
        const auto docs = preprocess_corpus(records, stoplist(), lexicon(), 3, &excluded);
        REQUIRE(docs.size() == 1);
        CHECK(docs[0].record_id == 12);
        REQUIRE(excluded.size() == 2);
        CHECK(excluded[0] == Exclusion{10, ExclusionReason::EmptyNarrative});
        CHECK(excluded[1] == Exclusion{11, ExclusionReason::BelowMinTokens});
    }

    TEST_CASE("pipeline idempotence and token shape over the fixture")
    {
        const auto corpus = testing::load_fixture_corpus();
        REQUIRE_FALSE(corpus.docs.empty());
        for (const auto& doc : corpus.docs) {
            CHECK(doc.tokens.size() >= 3);
            for (const auto& t : doc.tokens) {
                CHECK(!t.empty());
                CHECK(std::all_of(t.begin(), t.end(), [](char c) { return c >= 'a' && c <= 'z'; }));
            }
            CHECK(preprocess_text(join(doc.tokens)) == doc.tokens);
        }
    }

    TEST_CASE("stopword removal never lengthens and lemmatize keeps length")
    {
        const auto corpus = testing::load_fixture_corpus();
        for (const auto& r : corpus.records) {
            const auto tokens = tokenize(clean_text(r.narrative));
            const auto kept = remove_stopwords(tokens, stoplist());
            CHECK(kept.size() <= tokens.size());
            CHECK(lemmatize(kept, lexicon()).size() == kept.size());
        }
    }
}
