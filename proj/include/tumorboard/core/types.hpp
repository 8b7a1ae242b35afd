#pragma once

// Shared domain types used by every downstream module. All types are plain
// immutable-after-construction values; there is no shared mutable state.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tumorboard/util/dates.hpp"

namespace tumorboard {

struct ClinicalNote {
  std::string note_id;
  std::string patient_id;
  dates::Timestamp timestamp;
  std::string category = "clinical-note";
  std::string author_specialty;
  std::string text;  // may be empty, never "absent"
};

struct Demographics {
  std::string last_name;
  int age = 0;
  std::string sex;  // "M" or "F"
};

struct PatientChart {
  std::string patient_id;
  Demographics demographics;
  std::vector<ClinicalNote> notes;

  void sort_notes() {
    std::sort(notes.begin(), notes.end(), [](const ClinicalNote& a, const ClinicalNote& b) {
      if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
      return a.note_id < b.note_id;
    });
  }
};

enum class GenerationMethod {
  Physician,       // ingest-only baseline
  SecureGPT,       // ingest-only baseline (manual workflow output)
  SingleNote,
  SingleStep,
  MultiStep,
  MultiAgentLow,
  MultiAgentHigh,
};

inline const char* to_string(GenerationMethod m) {
  switch (m) {
    case GenerationMethod::Physician: return "Physician";
    case GenerationMethod::SecureGPT: return "SecureGPT";
    case GenerationMethod::SingleNote: return "SingleNote";
    case GenerationMethod::SingleStep: return "SingleStep";
    case GenerationMethod::MultiStep: return "MultiStep";
    case GenerationMethod::MultiAgentLow: return "MultiAgentLow";
    case GenerationMethod::MultiAgentHigh: return "MultiAgentHigh";
  }
  throw std::logic_error("unknown GenerationMethod");
}

inline GenerationMethod method_from_string(const std::string& s) {
  if (s == "Physician") return GenerationMethod::Physician;
  if (s == "SecureGPT") return GenerationMethod::SecureGPT;
  if (s == "SingleNote") return GenerationMethod::SingleNote;
  if (s == "SingleStep") return GenerationMethod::SingleStep;
  if (s == "MultiStep") return GenerationMethod::MultiStep;
  if (s == "MultiAgentLow") return GenerationMethod::MultiAgentLow;
  if (s == "MultiAgentHigh") return GenerationMethod::MultiAgentHigh;
  throw std::invalid_argument("unknown generation method: " + s);
}

// The two baselines arrive as data files; only the other five run a pipeline.
inline bool is_generatable(GenerationMethod m) {
  return m != GenerationMethod::Physician && m != GenerationMethod::SecureGPT;
}

struct StructuredSummary {
  std::string id_section;
  std::string biomarkers_section;
  std::string prior_therapy_section;
  std::optional<std::string> last_name_bracketed;
};

struct Citation {
  std::string note_id;
  std::string snippet;     // exact quoted text
  std::size_t start_offset = 0;  // code point offsets into the note text
  std::size_t end_offset = 0;
  bool resolved = false;
};

struct SummaryArtifact {
  std::string case_id;
  GenerationMethod method = GenerationMethod::SingleNote;
  std::string body;
  StructuredSummary structured;
  std::vector<Citation> citations;
  std::vector<std::string> transcript_refs;  // gateway request digests, call order
  std::string created_at;                    // ISO-8601; derived from the board date
};

// One fact in a per-patient checklist. Subattributes nest exactly one level.
struct Attribute {
  std::string attribute_id;
  std::string attribute_type;  // Demographics, Stage, Pathology, ... (open set)
  std::string value;
  std::string importance;      // recommended: Critical / High / Medium / Low
  std::vector<Attribute> subattributes;  // empty = none
};

struct Rubric {
  std::string patient_id;
  std::vector<Attribute> attributes;
};

// Highest-granularity scoring unit: a leaf attribute or a subattribute.
struct RubricItem {
  std::string item_id;
  std::string attribute_type;
  std::string value;
  std::string importance;
  std::optional<std::string> parent_id;
};

}  // namespace tumorboard
