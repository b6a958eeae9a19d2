#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace corpusforge::text {

// UTF-8 helpers. Malformed byte sequences decode to U+FFFD, so every
// function here is total over arbitrary input.

std::u32string decode(std::string_view utf8);
std::string encode(std::u32string_view codepoints);
void append(std::string& out, char32_t cp);

bool is_space(char32_t cp);
bool is_digit(char32_t cp);
char32_t to_lower(char32_t cp);

std::string trim(std::string_view s);
// Number of code points after dropping every whitespace character.
std::size_t count_non_space(std::string_view s);
std::size_t length(std::string_view s);

}  // namespace corpusforge::text
