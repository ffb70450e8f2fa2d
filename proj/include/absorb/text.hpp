#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// UTF-8 handling and a small, table-driven character model. Everything here
// is locale-independent so analysis results are identical on every platform.
namespace absorb::text {

/// Decodes UTF-8 into Unicode scalar values. Throws Error(data) on malformed
/// input (overlongs, surrogates and truncated sequences included).
std::u32string decode(std::string_view utf8);
std::string encode(std::u32string_view scalars);
std::string encode(char32_t c);

/// True when `utf8` is well-formed.
bool valid_utf8(std::string_view utf8) noexcept;

/// Length in Unicode scalars.
std::size_t scalar_length(std::string_view utf8);

bool is_space(char32_t c) noexcept;
bool is_digit(char32_t c) noexcept;
bool is_letter(char32_t c) noexcept;
bool is_upper(char32_t c) noexcept;
bool is_lower(char32_t c) noexcept;
inline bool is_alnum(char32_t c) noexcept { return is_letter(c) || is_digit(c); }
char32_t to_lower(char32_t c) noexcept;

std::u32string to_lower(std::u32string_view s);
std::string to_lower(std::string_view utf8);

std::string_view trim(std::string_view s) noexcept;
std::u32string_view trim(std::u32string_view s) noexcept;

/// Collapses runs of spaces/tabs inside each line to one space, trims every
/// line, folds CRLF to LF and trims the whole text. Newlines survive so
/// blank-line paragraph boundaries stay detectable.
std::string normalize_whitespace(std::string_view utf8);

/// Text before the first blank line (a line holding only whitespace).
std::string first_paragraph(std::string_view article_text);

/// Lowercased runs of letters/digits. Punctuation separates and is dropped.
std::vector<std::string> tokenize_words(std::string_view utf8);

/// Splits on ASCII/Unicode whitespace; no other processing.
std::vector<std::string> split_whitespace(std::string_view utf8);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace absorb::text
