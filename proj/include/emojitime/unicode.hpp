#pragma once

#include <string>
#include <string_view>

namespace emojitime::unicode {

/// Decodes UTF-8; invalid or truncated sequences become U+FFFD.
std::u32string decode(std::string_view utf8);
std::string encode(std::u32string_view text);
std::string encode(char32_t cp);

bool is_space(char32_t cp);
/// Punctuation, joiners, variation selectors and similar non-word marks.
bool is_punctuation(char32_t cp);
bool is_digit(char32_t cp);
char32_t to_lower(char32_t cp);

}  // namespace emojitime::unicode
