#pragma once

// Citation grounding: locate a quoted snippet inside its source note and
// report code point offsets. Byte-wise search is safe because a valid UTF-8
// lead byte never matches a continuation byte, so any hit is a code point
// boundary.

#include <optional>
#include <string_view>

#include "tumorboard/core/types.hpp"
#include "tumorboard/util/unicode.hpp"

namespace tumorboard {

struct CitationSpan {
  std::size_t start_offset = 0;  // code points
  std::size_t end_offset = 0;
};

// First exact occurrence; nullopt when the snippet does not appear.
inline std::optional<CitationSpan> resolve_citation(std::string_view note_text,
                                                    std::string_view snippet) {
  if (snippet.empty()) return std::nullopt;
  std::size_t byte = note_text.find(snippet);
  if (byte == std::string_view::npos) return std::nullopt;
  std::size_t start = unicode::code_point_index_of(note_text, byte);
  return CitationSpan{start, start + unicode::code_point_count(snippet)};
}

inline Citation make_citation(const std::string& note_id, const std::string& snippet,
                              std::string_view note_text) {
  Citation c;
  c.note_id = note_id;
  c.snippet = snippet;
  if (auto span = resolve_citation(note_text, snippet)) {
    c.start_offset = span->start_offset;
    c.end_offset = span->end_offset;
    c.resolved = true;
  }
  return c;
}

}  // namespace tumorboard
