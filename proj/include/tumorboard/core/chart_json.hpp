#pragma once

// Canonical chart JSON format: patient header plus a notes array. This is the
// store's on-disk representation and the round-trip target for ingestion.

#include <json.hpp>

#include "tumorboard/core/types.hpp"
#include "tumorboard/util/dates.hpp"

namespace tumorboard {

inline nlohmann::json note_to_json(const ClinicalNote& n) {
  return nlohmann::json{{"note_id", n.note_id},
                        {"patient_id", n.patient_id},
                        {"timestamp", dates::format_timestamp(n.timestamp)},
                        {"category", n.category},
                        {"author_specialty", n.author_specialty},
                        {"text", n.text}};
}

inline ClinicalNote note_from_json(const nlohmann::json& j) {
  ClinicalNote n;
  n.note_id = j.at("note_id").get<std::string>();
  n.patient_id = j.at("patient_id").get<std::string>();
  n.timestamp = dates::parse_timestamp(j.at("timestamp").get<std::string>());
  n.category = j.value("category", std::string{"clinical-note"});
  n.author_specialty = j.value("author_specialty", std::string{});
  n.text = j.at("text").get<std::string>();
  return n;
}

inline nlohmann::json chart_to_json(const PatientChart& chart) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["patient_id"] = chart.patient_id;
  j["demographics"] = {{"last_name", chart.demographics.last_name},
                       {"age", chart.demographics.age},
                       {"sex", chart.demographics.sex}};
  nlohmann::json notes = nlohmann::json::array();
  for (const auto& n : chart.notes) notes.push_back(note_to_json(n));
  j["notes"] = notes;
  return j;
}

inline PatientChart chart_from_json(const nlohmann::json& j) {
  PatientChart chart;
  chart.patient_id = j.at("patient_id").get<std::string>();
  const auto& d = j.at("demographics");
  chart.demographics.last_name = d.value("last_name", std::string{});
  chart.demographics.age = d.value("age", 0);
  chart.demographics.sex = d.value("sex", std::string{});
  for (const auto& n : j.at("notes")) chart.notes.push_back(note_from_json(n));
  chart.sort_notes();
  return chart;
}

}  // namespace tumorboard
