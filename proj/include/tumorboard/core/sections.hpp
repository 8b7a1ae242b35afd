#pragma once

// Parsing and rendering of the three-section summary format. Parsing is
// label-driven and order-tolerant: generated text may permute the headings
// and evaluation still has to proceed.

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tumorboard/core/types.hpp"

namespace tumorboard {

inline constexpr std::array<std::string_view, 3> kSectionLabels = {
    "ID:", "Biomarkers/NGS:", "Prior therapy:"};

struct MissingSection : std::runtime_error {
  explicit MissingSection(const std::string& name)
      : std::runtime_error("missing summary section: " + name), section(name) {}
  std::string section;
};

struct DuplicateSection : std::runtime_error {
  explicit DuplicateSection(const std::string& name)
      : std::runtime_error("duplicate summary section: " + name), section(name) {}
  std::string section;
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::optional<int> label_at_line_start(std::string_view line) {
  for (std::size_t i = 0; i < kSectionLabels.size(); ++i) {
    if (line.substr(0, kSectionLabels[i].size()) == kSectionLabels[i]) return static_cast<int>(i);
  }
  return std::nullopt;
}

// First bracketed ALL-CAPS token in the ID section, e.g. "[DOE]" -> "DOE".
inline std::optional<std::string> bracketed_last_name(std::string_view id_section) {
  for (std::size_t i = 0; i < id_section.size(); ++i) {
    if (id_section[i] != '[') continue;
    std::size_t close = id_section.find(']', i + 1);
    if (close == std::string_view::npos) return std::nullopt;
    std::string_view inner = id_section.substr(i + 1, close - i - 1);
    if (inner.empty()) continue;
    bool caps = true;
    for (char c : inner) {
      bool ok = (c >= 'A' && c <= 'Z') || c == ' ' || c == '-' || c == '\'';
      if (!ok) { caps = false; break; }
    }
    if (caps) return std::string(inner);
    i = close;
  }
  return std::nullopt;
}

}  // namespace detail

inline StructuredSummary parse_summary_sections(std::string_view text) {
  std::array<std::optional<std::string>, 3> sections;
  int current = -1;
  std::string buffer;

  auto flush = [&]() {
    if (current < 0) return;
    if (sections[static_cast<std::size_t>(current)].has_value())
      throw DuplicateSection(std::string(kSectionLabels[static_cast<std::size_t>(current)].substr(
          0, kSectionLabels[static_cast<std::size_t>(current)].size() - 1)));
    sections[static_cast<std::size_t>(current)] = detail::trim(buffer);
    buffer.clear();
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    if (auto label = detail::label_at_line_start(line)) {
      flush();
      current = *label;
      buffer = std::string(line.substr(kSectionLabels[static_cast<std::size_t>(*label)].size()));
    } else if (current >= 0) {
      buffer += '\n';
      buffer += line;
    }
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  flush();

  for (std::size_t i = 0; i < kSectionLabels.size(); ++i) {
    if (!sections[i].has_value())
      throw MissingSection(std::string(kSectionLabels[i].substr(0, kSectionLabels[i].size() - 1)));
  }

  StructuredSummary out;
  out.id_section = *sections[0];
  out.biomarkers_section = *sections[1];
  out.prior_therapy_section = *sections[2];
  out.last_name_bracketed = detail::bracketed_last_name(out.id_section);
  return out;
}

// Canonical rendering: fixed label order, one blank line between categories.
// parse_summary_sections(render_summary(s)) recovers the section contents.
inline std::string render_summary(const StructuredSummary& s) {
  std::string out;
  out += "ID: ";
  out += s.id_section;
  out += "\n\nBiomarkers/NGS: ";
  out += s.biomarkers_section;
  out += "\n\nPrior therapy: ";
  out += s.prior_therapy_section;
  return out;
}

}  // namespace tumorboard
