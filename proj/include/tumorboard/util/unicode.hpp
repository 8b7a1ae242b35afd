#pragma once

// UTF-8 code point utilities. Offsets throughout the project are code point
// offsets, never byte offsets; these helpers convert between the two.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace tumorboard::unicode {

inline bool is_continuation_byte(unsigned char c) { return (c & 0xC0) == 0x80; }

inline std::size_t code_point_count(std::string_view text) {
  std::size_t n = 0;
  for (unsigned char c : text) {
    if (!is_continuation_byte(c)) ++n;
  }
  return n;
}

// Byte offset of the code point with index `cp`. Returns text.size() when
// cp >= code_point_count(text).
inline std::size_t byte_offset_of(std::string_view text, std::size_t cp) {
  std::size_t seen = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!is_continuation_byte(static_cast<unsigned char>(text[i]))) {
      if (seen == cp) return i;
      ++seen;
    }
  }
  return text.size();
}

// Code point index of the code point starting at `byte`. `byte` must be a
// code point boundary (a match found by byte-wise search always is, because
// a UTF-8 lead byte never equals a continuation byte).
inline std::size_t code_point_index_of(std::string_view text, std::size_t byte) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (!is_continuation_byte(static_cast<unsigned char>(text[i]))) ++n;
  }
  return n;
}

// Slice by half-open code point range [start, end).
inline std::string slice(std::string_view text, std::size_t start_cp, std::size_t end_cp) {
  if (end_cp <= start_cp) return {};
  std::size_t b = byte_offset_of(text, start_cp);
  std::size_t e = byte_offset_of(text, end_cp);
  return std::string(text.substr(b, e - b));
}

}  // namespace tumorboard::unicode
