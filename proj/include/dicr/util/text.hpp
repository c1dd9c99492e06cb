#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dicr::text {

// Lower-cases and splits on whitespace; sentence punctuation becomes its own
// token.  Apostrophes and hyphens inside words are kept.
std::vector<std::string> tokenize(std::string_view s);

// Same splitting as tokenize() without case folding.
std::vector<std::string> split_words(std::string_view s);

std::string casefold(std::string_view s);

// casefold + drop every non-alphanumeric byte; used for entity matching.
std::string normalize_token(std::string_view s);

std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ");
std::vector<std::string> split(std::string_view s, char delim);
std::string_view trim(std::string_view s);
bool is_punctuation_token(std::string_view token);

}  // namespace dicr::text
