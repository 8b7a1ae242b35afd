#pragma once

// Seeded synthetic chart generator. Charts are PHI-free and deterministic for
// a fixed (seed, profile); every fact named by the profile is embedded
// verbatim in at least one note's text, so rubric ground truth is known by
// construction. A companion rubric builder emits the matching fact checklist.

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tumorboard/core/types.hpp"
#include "tumorboard/util/dates.hpp"
#include "tumorboard/util/rng.hpp"

namespace tumorboard {

struct TherapyEvent {
  dates::Date date;
  std::string modality;  // "medical" | "radiation" | "surgical"
  std::string description;
};

struct StagingEvent {
  dates::Date date;
  std::string stage;
};

struct SyntheticProfile {
  std::string cancer_type = "NSCLC adenocarcinoma";
  bool has_ngs_report = true;
  std::size_t n_notes = 6;
  std::vector<TherapyEvent> therapy_events;
  std::vector<StagingEvent> staging_history;
};

namespace synthetic_detail {

inline constexpr std::array<const char*, 8> kSurnames = {
    "ZEPHYRIN", "QUIMBLE", "VORANTH", "MERRADAY", "OKSTRAND", "FENWICKE", "TALBROOK", "JUNIPINE"};

inline constexpr std::array<const char*, 5> kDrivers = {
    "KRAS G12C", "EGFR Ex19del", "ALK fusion", "BRAF V600E", "MET ex14 skipping"};

inline constexpr std::array<int, 4> kPdl1 = {1, 5, 50, 80};

struct Persona {
  std::string last_name;
  int age;
  std::string sex;
  std::string ngs_result;  // empty when profile has no report
  dates::Date anchor;      // most recent note date
};

inline dates::Date latest_profile_date(const SyntheticProfile& p) {
  // No events: fall back to a fixed base so empty profiles stay deterministic.
  dates::Date latest = dates::parse_date("2025-03-01");
  for (const auto& e : p.therapy_events) latest = std::max(latest, e.date);
  for (const auto& e : p.staging_history) latest = std::max(latest, e.date);
  return latest;
}

inline Persona make_persona(std::uint64_t seed, const SyntheticProfile& p) {
  rng::Prng prng(rng::derive_seed(seed, 0xC4A5E));
  Persona persona;
  persona.last_name = kSurnames[prng.below(kSurnames.size())];
  persona.age = 45 + static_cast<int>(prng.below(40));
  persona.sex = prng.below(2) == 0 ? "M" : "F";
  if (p.has_ngs_report) {
    persona.ngs_result = std::string(kDrivers[prng.below(kDrivers.size())]) + ", PD-L1 TPS " +
                         std::to_string(kPdl1[prng.below(kPdl1.size())]) + "%";
  }
  persona.anchor = latest_profile_date(p).add_days(7 + static_cast<int>(prng.below(7)));
  return persona;
}

inline std::string demographics_line(const Persona& persona) {
  return persona.last_name + ", " + std::to_string(persona.age) + persona.sex;
}

}  // namespace synthetic_detail

inline PatientChart generate_synthetic_chart(std::uint64_t seed, const SyntheticProfile& profile) {
  using synthetic_detail::Persona;
  Persona persona = synthetic_detail::make_persona(seed, profile);
  rng::Prng prng(rng::derive_seed(seed, 0x0775));

  PatientChart chart;
  chart.patient_id = "synth-" + std::to_string(seed);
  chart.demographics = Demographics{persona.last_name, persona.age, persona.sex};

  struct Planned {
    dates::Date date;
    std::string specialty;
    std::string text;
    std::vector<std::string> facts;  // fact strings this note is responsible for
  };
  std::vector<Planned> planned;

  // Most recent oncology progress note: demographics plus full therapy history.
  {
    std::string text = "Oncology progress note.\nPatient: " +
                       synthetic_detail::demographics_line(persona) + ".\nDiagnosis: " +
                       profile.cancer_type + ".\n";
    if (!profile.therapy_events.empty()) {
      text += "Treatment history:\n";
      for (const auto& e : profile.therapy_events)
        text += "- " + e.description + " (" + e.modality + ", " + dates::format_date(e.date) + ")\n";
    }
    text += "Plan: present at thoracic tumor board.\n";
    Planned note{persona.anchor, "oncology", text, {}};
    note.facts.push_back(profile.cancer_type);
    for (const auto& e : profile.therapy_events) note.facts.push_back(e.description);
    planned.push_back(std::move(note));
  }

  if (!persona.ngs_result.empty()) {
    planned.push_back(Planned{
        persona.anchor.add_days(-21 - static_cast<int>(prng.below(30))), "pathology",
        "Molecular pathology report.\nPatient: " + synthetic_detail::demographics_line(persona) +
            ".\nBiomarkers: " + persona.ngs_result + ".\nAssay: tissue NGS panel.\n",
        {persona.ngs_result}});
  }

  for (const auto& s : profile.staging_history) {
    planned.push_back(Planned{
        s.date, "radiation oncology",
        "Staging assessment.\nPatient: " + synthetic_detail::demographics_line(persona) +
            ".\nDiagnosis: " + profile.cancer_type + ".\nStage: " + s.stage + ".\n",
        {s.stage}});
  }

  for (const auto& e : profile.therapy_events) {
    planned.push_back(Planned{
        e.date, e.modality == "medical" ? "oncology" : e.modality == "radiation"
                ? "radiation oncology" : "thoracic surgery",
        "Treatment note.\nPatient: " + synthetic_detail::demographics_line(persona) +
            ".\nPerformed: " + e.description + " (" + e.modality + ").\n",
        {e.description}});
  }

  std::size_t n = std::max<std::size_t>(profile.n_notes, 1);
  std::vector<Planned> emitted;
  if (planned.size() <= n) {
    emitted = planned;
    // Pad with scheduling-only notes carrying nothing tumor-board relevant.
    int pad = 0;
    while (emitted.size() < n) {
      emitted.push_back(Planned{
          persona.anchor.add_days(-3 - 11 * (++pad)), "administrative",
          "Scheduling note.\nPatient called to confirm upcoming appointment. Parking "
          "instructions provided. No clinical content discussed.\n",
          {}});
    }
  } else {
    // Keep the first n planned notes and fold the displaced facts into the
    // most recent note as an outside-records addendum.
    emitted.assign(planned.begin(), planned.begin() + static_cast<std::ptrdiff_t>(n));
    std::string addendum;
    for (std::size_t i = n; i < planned.size(); ++i) {
      for (const auto& fact : planned[i].facts) addendum += "- " + fact + "\n";
    }
    if (!addendum.empty())
      emitted[0].text += "Outside records reviewed:\n" + addendum;
  }

  int id = 0;
  for (const auto& p : emitted) {
    ClinicalNote note;
    note.note_id = chart.patient_id + "-note-" + std::to_string(++id);
    note.patient_id = chart.patient_id;
    note.timestamp = dates::Timestamp{p.date.start_of_day().epoch_seconds + 8 * 3600};
    note.category = "clinical-note";
    note.author_specialty = p.specialty;
    note.text = p.text;
    chart.notes.push_back(std::move(note));
  }
  chart.sort_notes();
  return chart;
}

// Fact checklist matching the generated chart: every value is a string the
// chart embeds verbatim, so judged scores have a known ceiling.
inline Rubric synthetic_rubric(std::uint64_t seed, const SyntheticProfile& profile) {
  using synthetic_detail::Persona;
  Persona persona = synthetic_detail::make_persona(seed, profile);

  Rubric rubric;
  rubric.patient_id = "synth-" + std::to_string(seed);
  int next_id = 0;

  auto leaf = [&](const std::string& type, const std::string& value, const std::string& importance) {
    rubric.attributes.push_back(
        Attribute{std::to_string(++next_id), type, value, importance, {}});
  };

  leaf("Demographics", std::to_string(persona.age) + persona.sex, "High");
  leaf("Pathology", profile.cancer_type, "Critical");
  if (!profile.staging_history.empty())
    leaf("Stage", profile.staging_history.back().stage, "Critical");
  if (!persona.ngs_result.empty()) leaf("Molecular", persona.ngs_result, "Critical");

  for (const auto& e : profile.therapy_events) {
    std::string type = e.modality == "medical"     ? "Medical Treatment"
                       : e.modality == "radiation" ? "Radiation Treatment"
                                                   : "Surgical Treatment";
    std::string year = dates::format_date(e.date).substr(0, 4);
    Attribute parent{std::to_string(++next_id), type, e.description + " " + year, "Critical", {}};
    parent.subattributes.push_back(
        Attribute{parent.attribute_id + "a", type, e.description, "Critical", {}});
    parent.subattributes.push_back(
        Attribute{parent.attribute_id + "b", type, year, "Medium", {}});
    rubric.attributes.push_back(std::move(parent));
  }
  return rubric;
}

}  // namespace tumorboard
