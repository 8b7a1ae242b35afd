#pragma once

// Longitudinal note store. File-backed (a directory of chart JSON documents)
// with an in-memory index; reads are concurrent, ingestion replaces a whole
// patient chart under a write lock.

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "tumorboard/core/chart_json.hpp"
#include "tumorboard/core/types.hpp"
#include "tumorboard/util/dates.hpp"
#include "tumorboard/util/fs.hpp"

namespace tumorboard {

struct PatientNotFound : std::runtime_error {
  explicit PatientNotFound(const std::string& id)
      : std::runtime_error("patient not found: " + id), patient_id(id) {}
  std::string patient_id;
};

struct NoMatchingNote : std::runtime_error {
  explicit NoMatchingNote(const std::string& what) : std::runtime_error(what) {}
};

struct NoteQuery {
  std::string patient_id;
  dates::Date as_of;
  std::optional<int> lookback_days;  // absent = caller-chosen policy (no lower bound)
  std::vector<std::string> categories = {"clinical-note"};
};

struct NoteQueryResult {
  std::vector<ClinicalNote> notes;
  std::size_t total_count = 0;  // == notes.size(); surfaced for agent replies
};

class ChartStore {
 public:
  // In-memory only.
  ChartStore() = default;

  // File-backed: loads every *.json chart in the directory (which may be
  // empty or not yet exist); put() writes through to the same directory.
  explicit ChartStore(const std::filesystem::path& dir) : dir_(dir) {
    if (std::filesystem::exists(dir)) {
      std::vector<std::filesystem::path> files;
      for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == ".json") files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) {
        auto chart = chart_from_json(nlohmann::json::parse(fs::read_file(f)));
        charts_[chart.patient_id] = std::move(chart);
      }
    }
  }

  void put(PatientChart chart) {
    for (auto& note : chart.notes) {
      if (note.patient_id.empty()) note.patient_id = chart.patient_id;
      else if (note.patient_id != chart.patient_id)
        throw std::invalid_argument("note " + note.note_id + " belongs to patient " +
                                    note.patient_id + ", not " + chart.patient_id);
    }
    chart.sort_notes();
    std::unique_lock lock(*mutex_);
    if (!dir_.empty()) {
      fs::write_file(dir_ / (chart.patient_id + ".json"), chart_to_json(chart).dump(2) + "\n");
    }
    charts_[chart.patient_id] = std::move(chart);
  }

  bool has_patient(const std::string& patient_id) const {
    std::shared_lock lock(*mutex_);
    return charts_.count(patient_id) > 0;
  }

  PatientChart chart(const std::string& patient_id) const {
    std::shared_lock lock(*mutex_);
    auto it = charts_.find(patient_id);
    if (it == charts_.end()) throw PatientNotFound(patient_id);
    return it->second;
  }

  std::vector<std::string> patient_ids() const {
    std::shared_lock lock(*mutex_);
    std::vector<std::string> ids;
    for (const auto& [id, _] : charts_) ids.push_back(id);
    return ids;
  }

  // Window filter: timestamps in [as_of - lookback_days, as_of], both ends
  // inclusive, category must match; ascending (timestamp, note_id) order.
  NoteQueryResult retrieve_notes(const NoteQuery& query) const {
    if (query.categories.empty()) throw std::invalid_argument("note query needs >= 1 category");
    PatientChart c = chart(query.patient_id);
    dates::Timestamp hi = query.as_of.end_of_day();
    std::optional<dates::Timestamp> lo;
    if (query.lookback_days.has_value()) {
      if (*query.lookback_days < 1) throw std::invalid_argument("lookback_days must be >= 1");
      lo = query.as_of.add_days(-*query.lookback_days).start_of_day();
    }
    NoteQueryResult result;
    for (const auto& n : c.notes) {
      if (n.timestamp > hi) continue;
      if (lo && n.timestamp < *lo) continue;
      if (std::find(query.categories.begin(), query.categories.end(), n.category) ==
          query.categories.end())
        continue;
      result.notes.push_back(n);
    }
    result.total_count = result.notes.size();
    return result;
  }

  // Latest note on or before as_of whose author specialty matches
  // (case-insensitive); ties broken by note_id descending.
  ClinicalNote most_recent_note(const std::string& patient_id, dates::Date as_of,
                                const std::string& author_specialty) const {
    PatientChart c = chart(patient_id);
    dates::Timestamp hi = as_of.end_of_day();
    auto lower = [](std::string s) {
      std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
      return s;
    };
    std::string want = lower(author_specialty);
    const ClinicalNote* best = nullptr;
    for (const auto& n : c.notes) {
      if (n.timestamp > hi) continue;
      if (lower(n.author_specialty) != want) continue;
      if (best == nullptr || n.timestamp > best->timestamp ||
          (n.timestamp == best->timestamp && n.note_id > best->note_id)) {
        best = &n;
      }
    }
    if (best == nullptr)
      throw NoMatchingNote("no " + author_specialty + " note on or before " +
                           dates::format_date(as_of) + " for patient " + patient_id);
    return *best;
  }

 private:
  std::filesystem::path dir_;
  std::map<std::string, PatientChart> charts_;
  // unique_ptr keeps the store movable
  mutable std::unique_ptr<std::shared_mutex> mutex_ = std::make_unique<std::shared_mutex>();
};

}  // namespace tumorboard
