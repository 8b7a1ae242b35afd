#pragma once

// Ingestion of an R4-flavored FHIR bundle subset: DocumentReference entries
// with an inline or base64 attachment become ClinicalNotes. Anything else in
// the bundle is counted as skipped. Entry-level problems are collected, never
// abort the bundle.

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

#include "tumorboard/core/types.hpp"
#include "tumorboard/util/base64.hpp"
#include "tumorboard/util/dates.hpp"

namespace tumorboard {

struct MalformedBundle : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IngestReport {
  std::vector<ClinicalNote> accepted;
  std::size_t skipped = 0;  // non-DocumentReference entries
  std::vector<std::string> errors;  // per-entry error messages
};

namespace detail {

inline std::string strip_reference_prefix(const std::string& ref) {
  auto slash = ref.rfind('/');
  return slash == std::string::npos ? ref : ref.substr(slash + 1);
}

inline ClinicalNote note_from_document_reference(const nlohmann::json& res) {
  ClinicalNote note;
  note.note_id = res.value("id", std::string{});
  if (note.note_id.empty()) throw std::invalid_argument("missing id");

  if (!res.contains("date")) throw std::invalid_argument("missing date");
  note.timestamp = dates::parse_timestamp(res.at("date").get<std::string>());

  if (res.contains("subject") && res["subject"].contains("reference"))
    note.patient_id = strip_reference_prefix(res["subject"]["reference"].get<std::string>());

  note.category = "clinical-note";
  if (res.contains("category") && res["category"].is_array() && !res["category"].empty()) {
    const auto& cat = res["category"][0];
    if (cat.contains("coding") && cat["coding"].is_array() && !cat["coding"].empty())
      note.category = cat["coding"][0].value("code", std::string{"clinical-note"});
    else if (cat.contains("text"))
      note.category = cat["text"].get<std::string>();
  }

  if (res.contains("context") && res["context"].contains("practiceSetting")) {
    const auto& ps = res["context"]["practiceSetting"];
    if (ps.contains("text")) note.author_specialty = ps["text"].get<std::string>();
  }
  if (note.author_specialty.empty() && res.contains("type") && res["type"].contains("text"))
    note.author_specialty = res["type"]["text"].get<std::string>();

  if (!res.contains("content") || !res["content"].is_array() || res["content"].empty())
    throw std::invalid_argument("missing content attachment");
  const auto& attachment = res["content"][0].at("attachment");
  if (attachment.contains("data")) {
    note.text = base64::decode(attachment["data"].get<std::string>());
  } else if (attachment.contains("text")) {
    note.text = attachment["text"].get<std::string>();
  } else {
    throw std::invalid_argument("attachment has neither base64 data nor inline text");
  }
  return note;
}

}  // namespace detail

inline IngestReport ingest_fhir_bundle(const nlohmann::json& bundle) {
  if (!bundle.is_object() || !bundle.contains("entry") || !bundle["entry"].is_array())
    throw MalformedBundle("bundle must be a JSON object with an entry array");

  IngestReport report;
  std::size_t index = 0;
  for (const auto& entry : bundle["entry"]) {
    std::size_t i = index++;
    if (!entry.contains("resource")) {
      report.errors.push_back("entry " + std::to_string(i) + ": missing resource");
      continue;
    }
    const auto& res = entry["resource"];
    if (res.value("resourceType", std::string{}) != "DocumentReference") {
      ++report.skipped;
      continue;
    }
    try {
      report.accepted.push_back(detail::note_from_document_reference(res));
    } catch (const std::exception& e) {
      report.errors.push_back("entry " + std::to_string(i) + ": " + e.what());
    }
  }
  return report;
}

inline IngestReport ingest_fhir_bundle_text(const std::string& text) {
  nlohmann::json bundle = nlohmann::json::parse(text, nullptr, false);
  if (bundle.is_discarded()) throw MalformedBundle("bundle is not valid JSON");
  return ingest_fhir_bundle(bundle);
}

}  // namespace tumorboard
