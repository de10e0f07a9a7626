#pragma once

#include <string_view>

// Text of the files under core/data, compiled into the library.
namespace topicforge::resources {

std::string_view english_stopwords_text();
std::string_view aviation_stopwords_text();
std::string_view lemma_exceptions_text();
std::string_view wordlist_text();

} // namespace topicforge::resources
