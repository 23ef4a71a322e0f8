#pragma once

#include <string>
#include <string_view>

namespace facts::utf8 {

// Decodes UTF-8 into Unicode scalar values. Invalid sequences become U+FFFD.
std::u32string decode(std::string_view text);
std::string encode(std::u32string_view text);
void append(std::string& out, char32_t cp);

// Number of Unicode scalar values in `text`.
std::size_t length(std::string_view text);

bool is_letter(char32_t cp);
bool is_lower(char32_t cp);
char32_t to_lower(char32_t cp);

}  // namespace facts::utf8
