#include "kgrag/text.hpp"

#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <cstdio>

namespace kgrag {

std::u32string to_code_points(std::string_view utf8) {
  std::u32string out;
  out.reserve(utf8.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(utf8.data());
  const int32_t length = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    out.push_back(c < 0 ? U'\uFFFD' : static_cast<char32_t>(c));
  }
  return out;
}

std::string to_utf8(std::u32string_view code_points) {
  std::string out;
  out.reserve(code_points.size());
  for (char32_t cp : code_points) {
    uint8_t buf[U8_MAX_LENGTH];
    int32_t n = 0;
    UBool error = false;
    U8_APPEND(buf, n, U8_MAX_LENGTH, static_cast<UChar32>(cp), error);
    if (error) continue;
    out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
  }
  return out;
}

std::size_t code_point_length(std::string_view utf8) {
  const auto* bytes = reinterpret_cast<const uint8_t*>(utf8.data());
  const int32_t length = static_cast<int32_t>(utf8.size());
  std::size_t count = 0;
  int32_t i = 0;
  while (i < length) {
    U8_FWD_1(bytes, i, length);
    ++count;
  }
  return count;
}

std::string_view utf8_prefix(std::string_view utf8, std::size_t max_code_points) {
  const auto* bytes = reinterpret_cast<const uint8_t*>(utf8.data());
  const int32_t length = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  for (std::size_t n = 0; n < max_code_points && i < length; ++n) {
    U8_FWD_1(bytes, i, length);
  }
  return utf8.substr(0, static_cast<std::size_t>(i));
}

bool is_whitespace(char32_t cp) {
  return u_isUWhiteSpace(static_cast<UChar32>(cp));
}

bool is_punctuation(char32_t cp) { return u_ispunct(static_cast<UChar32>(cp)); }

std::string canonicalize(std::string_view text) {
  icu::UnicodeString folded = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  folded.foldCase(U_FOLD_CASE_DEFAULT);
  std::string utf8;
  folded.toUTF8String(utf8);

  std::u32string out;
  bool pending_space = false;
  for (char32_t cp : to_code_points(utf8)) {
    if (is_whitespace(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(cp);
  }
  return to_utf8(out);
}

std::string_view trim(std::string_view text) {
  constexpr std::string_view kSpace = " \t\r\n\f\v";
  const auto first = text.find_first_not_of(kSpace);
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(kSpace);
  return text.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines = split(text, '\n');
  for (auto& line : lines) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  }
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::vector<std::string> whitespace_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::u32string current;
  for (char32_t cp : to_code_points(text)) {
    if (is_whitespace(cp)) {
      if (!current.empty()) tokens.push_back(to_utf8(current));
      current.clear();
    } else {
      current.push_back(cp);
    }
  }
  if (!current.empty()) tokens.push_back(to_utf8(current));
  return tokens;
}

std::vector<std::string> character_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  for (char32_t cp : to_code_points(text)) {
    if (!is_whitespace(cp)) tokens.push_back(to_utf8(std::u32string(1, cp)));
  }
  return tokens;
}

std::string strip_punctuation(std::string_view token) {
  std::u32string cps = to_code_points(token);
  std::size_t begin = 0;
  std::size_t end = cps.size();
  while (begin < end && is_punctuation(cps[begin])) ++begin;
  while (end > begin && is_punctuation(cps[end - 1])) --end;
  return to_utf8(std::u32string_view(cps).substr(begin, end - begin));
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace kgrag

namespace kgrag {

std::string_view to_string(Tokenization t) {
  return t == Tokenization::space_tokenized ? "space_tokenized" : "char_tokenized";
}

std::optional<Tokenization> parse_tokenization(std::string_view text) {
  if (text == "space_tokenized" || text == "space" || text == "en") return Tokenization::space_tokenized;
  if (text == "char_tokenized" || text == "char" || text == "zh") return Tokenization::char_tokenized;
  return std::nullopt;
}

std::vector<std::string> metric_tokens(std::string_view text, Tokenization t) {
  const std::string folded = canonicalize(text);
  return t == Tokenization::space_tokenized ? whitespace_tokens(folded) : character_tokens(folded);
}

}  // namespace kgrag
