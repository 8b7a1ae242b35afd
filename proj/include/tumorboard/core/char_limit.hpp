#pragma once

#include <cstddef>
#include <string_view>

#include "tumorboard/util/unicode.hpp"

namespace tumorboard {

inline constexpr std::size_t kSummaryCharLimit = 999;

// Verdict of the character-limit rule. Counts Unicode code points, whitespace
// included; the caller strips citations before calling.
struct CharLimitVerdict {
  bool ok = true;
  std::size_t count = 0;
  std::size_t limit = kSummaryCharLimit;
};

inline CharLimitVerdict enforce_character_limit(std::string_view body,
                                                std::size_t limit = kSummaryCharLimit) {
  std::size_t n = unicode::code_point_count(body);
  return CharLimitVerdict{n <= limit, n, limit};
}

}  // namespace tumorboard
