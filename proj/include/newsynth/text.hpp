#pragma once

// UTF-8 helpers shared by every module: code point iteration, script tests,
// surface joining and the word-count rule used for length budgets.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace newsynth::text {

// Decodes one code point starting at `pos` and advances it. Malformed bytes
// decode as U+FFFD and consume a single byte.
inline char32_t next_code_point(std::string_view s, std::size_t& pos) {
  const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
  const unsigned char lead = byte(pos);
  std::size_t len = 0;
  char32_t cp = 0;
  if (lead < 0x80) {
    ++pos;
    return lead;
  } else if ((lead >> 5) == 0x6) {
    len = 2;
    cp = lead & 0x1F;
  } else if ((lead >> 4) == 0xE) {
    len = 3;
    cp = lead & 0x0F;
  } else if ((lead >> 3) == 0x1E) {
    len = 4;
    cp = lead & 0x07;
  } else {
    ++pos;
    return 0xFFFD;
  }
  if (pos + len > s.size()) {
    ++pos;
    return 0xFFFD;
  }
  for (std::size_t i = 1; i < len; ++i) {
    if ((byte(pos + i) >> 6) != 0x2) {
      ++pos;
      return 0xFFFD;
    }
    cp = (cp << 6) | (byte(pos + i) & 0x3F);
  }
  pos += len;
  return cp;
}

inline std::vector<char32_t> decode(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  for (std::size_t pos = 0; pos < s.size();) out.push_back(next_code_point(s, pos));
  return out;
}

inline std::size_t char_count(std::string_view s) {
  std::size_t n = 0;
  for (std::size_t pos = 0; pos < s.size();) {
    next_code_point(s, pos);
    ++n;
  }
  return n;
}

// Han ideographs, kana and hangul: scripts written without word spaces.
inline bool is_cjk(char32_t c) {
  return (c >= 0x4E00 && c <= 0x9FFF) || (c >= 0x3400 && c <= 0x4DBF) ||
         (c >= 0x20000 && c <= 0x2A6DF) || (c >= 0xF900 && c <= 0xFAFF) ||
         (c >= 0x3040 && c <= 0x30FF) || (c >= 0xAC00 && c <= 0xD7AF);
}

inline bool is_space(char32_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v' ||
         c == 0x3000 || c == 0x00A0;
}

inline bool is_punct(char32_t c) {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
           (c >= 0x7B && c <= 0x7E);
  }
  return (c >= 0x2000 && c <= 0x206F) || (c >= 0x3000 && c <= 0x303F) ||
         (c >= 0xFF01 && c <= 0xFF0F) || (c >= 0xFF1A && c <= 0xFF20) ||
         (c >= 0xFF3B && c <= 0xFF40) || (c >= 0xFF5B && c <= 0xFF65);
}

inline char32_t first_code_point(std::string_view s) {
  std::size_t pos = 0;
  return s.empty() ? 0 : next_code_point(s, pos);
}

inline char32_t last_code_point(std::string_view s) {
  if (s.empty()) return 0;
  std::size_t start = s.size() - 1;
  while (start > 0 && (static_cast<unsigned char>(s[start]) >> 6) == 0x2) --start;
  std::size_t pos = start;
  return next_code_point(s, pos);
}

// Two pieces are glued without a space when either side of the seam is CJK
// (or CJK punctuation); space-delimited scripts get a single space.
inline bool needs_space(std::string_view left, std::string_view right) {
  if (left.empty() || right.empty()) return false;
  const char32_t a = last_code_point(left);
  const char32_t b = first_code_point(right);
  const auto tight = [](char32_t c) { return is_cjk(c) || (c >= 0x3000 && c <= 0x303F) || (c >= 0xFF00 && c <= 0xFFEF); };
  return !(tight(a) || tight(b));
}

template <typename Range>
std::string join(const Range& pieces) {
  std::string out;
  for (const auto& p : pieces) {
    const std::string_view piece(p);
    if (needs_space(out, piece)) out.push_back(' ');
    out.append(piece);
  }
  return out;
}

// Substring test that, for space-delimited scripts, only accepts matches on
// word boundaries ("cup" is not inside "cupboard", but 杯 is inside 世界杯).
inline bool contains_surface(std::string_view hay, std::string_view needle) {
  if (needle.empty()) return true;
  for (std::size_t at = hay.find(needle); at != std::string_view::npos; at = hay.find(needle, at + 1)) {
    const std::string_view before = hay.substr(0, at);
    const std::string_view after = hay.substr(at + needle.size());
    const bool left_ok = before.empty() || is_space(last_code_point(before)) ||
                         is_cjk(last_code_point(before)) || is_cjk(first_code_point(needle)) ||
                         is_punct(last_code_point(before));
    const bool right_ok = after.empty() || is_space(first_code_point(after)) ||
                          is_cjk(first_code_point(after)) || is_cjk(last_code_point(needle)) ||
                          is_punct(first_code_point(after));
    if (left_ok && right_ok) return true;
  }
  return false;
}

// Length in "words": each CJK character counts one, every other
// whitespace-delimited run counts one if it holds anything but punctuation.
inline std::size_t word_count(std::string_view s) {
  std::size_t words = 0;
  bool in_token = false;
  bool token_has_content = false;
  const auto flush = [&] {
    if (in_token && token_has_content) ++words;
    in_token = false;
    token_has_content = false;
  };
  for (std::size_t pos = 0; pos < s.size();) {
    const char32_t c = next_code_point(s, pos);
    if (is_cjk(c)) {
      flush();
      ++words;
    } else if (is_space(c)) {
      flush();
    } else {
      in_token = true;
      if (!is_punct(c)) token_has_content = true;
    }
  }
  flush();
  return words;
}

}  // namespace newsynth::text
