#pragma once

// Durable summary persistence. Records are keyed by a workflow-instance id
// derived from record content, which makes re-storing the same artifact
// idempotent: same content, same id, one file.

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>

#include "tumorboard/core/char_limit.hpp"
#include "tumorboard/core/types.hpp"
#include "tumorboard/util/digest.hpp"
#include "tumorboard/util/fs.hpp"

namespace tumorboard {

inline constexpr const char* kArtifactName = "TumorBoardSummary";
inline constexpr int kSummaryRecordSchemaVersion = 1;

struct StorageUnavailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline nlohmann::json citation_to_json(const Citation& c) {
  return nlohmann::json{{"note_id", c.note_id},
                        {"snippet", c.snippet},
                        {"start_offset", c.start_offset},
                        {"end_offset", c.end_offset},
                        {"resolved", c.resolved}};
}

inline Citation citation_from_json(const nlohmann::json& j) {
  Citation c;
  c.note_id = j.at("note_id").get<std::string>();
  c.snippet = j.at("snippet").get<std::string>();
  c.start_offset = j.at("start_offset").get<std::size_t>();
  c.end_offset = j.at("end_offset").get<std::size_t>();
  c.resolved = j.at("resolved").get<bool>();
  return c;
}

inline nlohmann::json artifact_to_json(const SummaryArtifact& a) {
  nlohmann::json citations = nlohmann::json::array();
  for (const auto& c : a.citations) citations.push_back(citation_to_json(c));
  return nlohmann::json{
      {"schema_version", kSummaryRecordSchemaVersion},
      {"artifact_name", kArtifactName},
      {"case_id", a.case_id},
      {"method", to_string(a.method)},
      {"body", a.body},
      {"sections",
       {{"id", a.structured.id_section},
        {"biomarkers", a.structured.biomarkers_section},
        {"prior_therapy", a.structured.prior_therapy_section},
        {"last_name", a.structured.last_name_bracketed ? nlohmann::json(*a.structured.last_name_bracketed)
                                                       : nlohmann::json(nullptr)}}},
      {"citations", citations},
      {"transcript_digests", a.transcript_refs},
      {"created_at", a.created_at}};
}

inline SummaryArtifact artifact_from_json(const nlohmann::json& j) {
  SummaryArtifact a;
  a.case_id = j.at("case_id").get<std::string>();
  a.method = method_from_string(j.at("method").get<std::string>());
  a.body = j.at("body").get<std::string>();
  const auto& s = j.at("sections");
  a.structured.id_section = s.at("id").get<std::string>();
  a.structured.biomarkers_section = s.at("biomarkers").get<std::string>();
  a.structured.prior_therapy_section = s.at("prior_therapy").get<std::string>();
  if (s.contains("last_name") && !s["last_name"].is_null())
    a.structured.last_name_bracketed = s["last_name"].get<std::string>();
  for (const auto& c : j.at("citations")) a.citations.push_back(citation_from_json(c));
  for (const auto& d : j.at("transcript_digests")) a.transcript_refs.push_back(d.get<std::string>());
  a.created_at = j.value("created_at", std::string{});
  return a;
}

class SummaryStorage {
 public:
  explicit SummaryStorage(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& dir() const { return dir_; }

  // Returns the workflow-instance id. Existing record with the same id is
  // left untouched.
  std::string store_record(nlohmann::json record) const {
    record.erase("workflow_instance_id");
    std::string id = "wfi-" + digest::sha256_hex(record.dump()).substr(0, 24);
    record["workflow_instance_id"] = id;
    auto path = dir_ / (id + ".json");
    try {
      if (!std::filesystem::exists(path)) fs::write_file(path, record.dump(2) + "\n");
    } catch (const std::exception& e) {
      throw StorageUnavailable(std::string("cannot persist summary record: ") + e.what());
    }
    return id;
  }

  nlohmann::json load_record(const std::string& id) const {
    auto path = dir_ / (id + ".json");
    if (!std::filesystem::exists(path)) throw StorageUnavailable("no record with id " + id);
    return nlohmann::json::parse(fs::read_file(path));
  }

  std::vector<std::string> record_ids() const {
    std::vector<std::string> ids;
    if (!std::filesystem::exists(dir_)) return ids;
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
      if (entry.path().extension() == ".json") ids.push_back(entry.path().stem().string());
    }
    std::sort(ids.begin(), ids.end());
    return ids;
  }

 private:
  std::filesystem::path dir_;
};

// Persists a validated artifact (plus any run metadata such as the audit log
// and strategy config snapshot) and returns the record id.
inline std::string store_summary(const SummaryArtifact& artifact, const SummaryStorage& storage,
                                 const nlohmann::json& extras = nlohmann::json::object()) {
  auto verdict = enforce_character_limit(artifact.body);
  if (!verdict.ok)
    throw std::invalid_argument("artifact body exceeds character limit: " +
                                std::to_string(verdict.count));
  nlohmann::json record = artifact_to_json(artifact);
  for (const auto& [key, value] : extras.items()) record[key] = value;
  return storage.store_record(std::move(record));
}

}  // namespace tumorboard
