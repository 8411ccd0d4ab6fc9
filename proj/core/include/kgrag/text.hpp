#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kgrag {

// Unicode case-fold, collapse whitespace runs to one space, trim.
std::string canonicalize(std::string_view text);

// Decodes UTF-8 into code points; invalid sequences become U+FFFD.
std::u32string to_code_points(std::string_view utf8);
std::string to_utf8(std::u32string_view code_points);

// Number of code points in a UTF-8 string.
std::size_t code_point_length(std::string_view utf8);

// Longest prefix of `utf8` holding at most `max_code_points` code points.
std::string_view utf8_prefix(std::string_view utf8, std::size_t max_code_points);

std::string_view trim(std::string_view text);

// Splits on a single character; keeps empty fields.
std::vector<std::string_view> split(std::string_view text, char sep);

// Splits on '\n', dropping a trailing '\r' from each line.
std::vector<std::string_view> split_lines(std::string_view text);

// Whitespace-separated tokens (Unicode white space).
std::vector<std::string> whitespace_tokens(std::string_view text);

// One token per non-whitespace code point.
std::vector<std::string> character_tokens(std::string_view text);

// Removes leading/trailing Unicode punctuation.
std::string strip_punctuation(std::string_view token);

bool is_punctuation(char32_t cp);
bool is_whitespace(char32_t cp);

// 64-bit FNV-1a; stable across platforms and runs.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t value);

}  // namespace kgrag

namespace kgrag {

// Unit of text for n-gram scans and text metrics: whitespace-separated words,
// or single characters for languages written without spaces.
enum class Tokenization { space_tokenized, char_tokenized };

std::string_view to_string(Tokenization t);
std::optional<Tokenization> parse_tokenization(std::string_view text);

// Tokens per `t`, case-folded. char_tokenized skips whitespace.
std::vector<std::string> metric_tokens(std::string_view text, Tokenization t);

}  // namespace kgrag
