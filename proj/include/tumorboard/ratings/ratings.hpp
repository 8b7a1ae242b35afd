#pragma once

// Subjective physician ratings: CSV ingestion, the conservative two-rater
// combination rule (mean rounded down to the lower Likert category), and
// weekly post-deployment monitoring with clustered bootstrap CIs and
// acceptability flags.

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "tumorboard/core/types.hpp"
#include "tumorboard/stats/bootstrap.hpp"
#include "tumorboard/util/csv.hpp"
#include "tumorboard/util/dates.hpp"

namespace tumorboard {

enum class RatingDomain { Overall, Style, Accuracy, Relevance };

inline const char* to_string(RatingDomain d) {
  switch (d) {
    case RatingDomain::Overall: return "Overall";
    case RatingDomain::Style: return "Style";
    case RatingDomain::Accuracy: return "Accuracy";
    case RatingDomain::Relevance: return "Relevance";
  }
  throw std::logic_error("unknown rating domain");
}

inline RatingDomain domain_from_string(const std::string& s) {
  if (s == "Overall") return RatingDomain::Overall;
  if (s == "Style") return RatingDomain::Style;
  if (s == "Accuracy") return RatingDomain::Accuracy;
  if (s == "Relevance") return RatingDomain::Relevance;
  throw std::invalid_argument("unknown rating domain: " + s);
}

inline constexpr std::array<RatingDomain, 4> kAllDomains = {
    RatingDomain::Overall, RatingDomain::Style, RatingDomain::Accuracy, RatingDomain::Relevance};

inline constexpr int kAcceptabilityThreshold = 3;

struct RatingRecord {
  std::string case_id;
  GenerationMethod method = GenerationMethod::MultiAgentLow;
  std::string rater_id;
  RatingDomain domain = RatingDomain::Overall;
  int score = 0;  // 1..5
  dates::Date rated_at;
};

struct CombinedRating {
  std::string case_id;
  GenerationMethod method = GenerationMethod::MultiAgentLow;
  RatingDomain domain = RatingDomain::Overall;
  int final_score = 0;
  double raw_mean = 0;
  dates::Date rated_at;  // earliest of the pair
};

struct RatingOutOfRange : std::runtime_error {
  explicit RatingOutOfRange(int score)
      : std::runtime_error("rating score " + std::to_string(score) + " outside 1..5") {}
};

struct IncompletePair : std::runtime_error {
  IncompletePair(const std::string& case_id, const std::string& domain, std::size_t n)
      : std::runtime_error("case " + case_id + " domain " + domain + " has " + std::to_string(n) +
                           " rater scores, exactly 2 required") {}
};

inline bool acceptable(int final_score) { return final_score >= kAcceptabilityThreshold; }

// Mean of the two ratings; a half-step mean rounds down to the lower category.
inline CombinedRating combine_pair(int r1, int r2) {
  for (int r : {r1, r2})
    if (r < 1 || r > 5) throw RatingOutOfRange(r);
  CombinedRating combined;
  combined.raw_mean = (static_cast<double>(r1) + static_cast<double>(r2)) / 2.0;
  combined.final_score = static_cast<int>(combined.raw_mean);  // floor; mean of 1..5 is >= 1
  return combined;
}

// Combines all records into per-(case, method, domain) final scores. Every
// rated cell needs exactly two raters.
inline std::vector<CombinedRating> combine_ratings(const std::vector<RatingRecord>& records) {
  std::map<std::tuple<std::string, std::string, std::string>, std::vector<const RatingRecord*>> cells;
  for (const auto& rec : records)
    cells[{rec.case_id, to_string(rec.method), to_string(rec.domain)}].push_back(&rec);

  std::vector<CombinedRating> combined;
  for (const auto& [key, cell] : cells) {
    if (cell.size() != 2) throw IncompletePair(std::get<0>(key), std::get<2>(key), cell.size());
    if (cell[0]->rater_id == cell[1]->rater_id)
      throw IncompletePair(std::get<0>(key), std::get<2>(key), 1);
    CombinedRating c = combine_pair(cell[0]->score, cell[1]->score);
    c.case_id = cell[0]->case_id;
    c.method = cell[0]->method;
    c.domain = cell[0]->domain;
    c.rated_at = std::min(cell[0]->rated_at, cell[1]->rated_at);
    combined.push_back(c);
  }
  return combined;
}

struct MonitorRow {
  std::string week;  // ISO week label or explicit bucket start date
  RatingDomain domain = RatingDomain::Overall;
  int n = 0;
  double mean = 0;
  double ci_low = 0;
  double ci_high = 0;
  bool mean_below = false;
  bool ci_below = false;
  bool any_case_below = false;
};

struct MonitorReport {
  std::vector<MonitorRow> rows;
  int threshold = kAcceptabilityThreshold;
  int n_reps = 0;
  std::uint64_t seed = 0;
};

// week_boundaries: optional explicit bucket start dates (sorted); a rating
// belongs to the last bucket starting on or before its date. Empty = ISO
// calendar weeks of the rating date.
inline MonitorReport weekly_monitor(const std::vector<RatingRecord>& records,
                                    const std::vector<dates::Date>& week_boundaries = {},
                                    int threshold = kAcceptabilityThreshold, int n_reps = 10000,
                                    std::uint64_t seed = 0) {
  auto combined = combine_ratings(records);

  auto week_of = [&](dates::Date d) -> std::string {
    if (week_boundaries.empty()) return dates::iso_week(d).label();
    std::string label = dates::format_date(week_boundaries.front());
    for (const auto& start : week_boundaries)
      if (start <= d) label = dates::format_date(start);
    return label;
  };

  // (week, domain) -> combined ratings
  std::map<std::pair<std::string, std::string>, std::vector<const CombinedRating*>> groups;
  for (const auto& c : combined) groups[{week_of(c.rated_at), to_string(c.domain)}].push_back(&c);

  MonitorReport report;
  report.threshold = threshold;
  report.n_reps = n_reps;
  report.seed = seed;
  for (const auto& [key, group] : groups) {
    MonitorRow row;
    row.week = key.first;
    row.domain = domain_from_string(key.second);
    row.n = static_cast<int>(group.size());

    std::vector<std::pair<std::string, double>> items;
    for (const auto* c : group) {
      items.push_back({c->case_id, static_cast<double>(c->final_score)});
      if (c->final_score < threshold) row.any_case_below = true;
    }
    auto mean = [](const std::vector<double>& v) {
      double sum = 0;
      for (double x : v) sum += x;
      return sum / static_cast<double>(v.size());
    };
    auto ci = stats::cluster_bootstrap_ci(items, mean, n_reps, seed);
    row.mean = ci.estimate;
    row.ci_low = ci.ci_low;
    row.ci_high = ci.ci_high;
    row.mean_below = row.mean < threshold;
    row.ci_below = row.ci_low < threshold;
    report.rows.push_back(row);
  }
  return report;
}

// --- file formats -----------------------------------------------------------

inline std::vector<RatingRecord> ratings_from_csv(const csv::Table& table) {
  std::vector<RatingRecord> records;
  int c_case = table.column("case_id");
  int c_method = table.column("method");
  int c_rater = table.column("rater_id");
  int c_domain = table.column("domain");
  int c_score = table.column("score");
  int c_date = table.column("rated_at");
  for (const auto& row : table.rows) {
    RatingRecord rec;
    rec.case_id = row[c_case];
    rec.method = method_from_string(row[c_method]);
    rec.rater_id = row[c_rater];
    rec.domain = domain_from_string(row[c_domain]);
    rec.score = std::stoi(row[c_score]);
    if (rec.score < 1 || rec.score > 5) throw RatingOutOfRange(rec.score);
    rec.rated_at = dates::parse_date(row[c_date]);
    records.push_back(rec);
  }
  return records;
}

inline std::string ratings_to_csv(const std::vector<RatingRecord>& records) {
  csv::Writer w({"case_id", "method", "rater_id", "domain", "score", "rated_at"});
  for (const auto& r : records)
    w.write_row({r.case_id, to_string(r.method), r.rater_id, to_string(r.domain),
                 std::to_string(r.score), dates::format_date(r.rated_at)});
  return w.str();
}

inline std::string monitor_report_to_csv(const MonitorReport& report) {
  csv::Writer w({"week", "domain", "n", "mean", "ci_low", "ci_high", "mean_below_threshold",
                 "ci_below_threshold", "any_case_below_threshold"});
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return std::string(buf);
  };
  for (const auto& row : report.rows)
    w.write_row({row.week, to_string(row.domain), std::to_string(row.n), num(row.mean),
                 num(row.ci_low), num(row.ci_high), row.mean_below ? "1" : "0",
                 row.ci_below ? "1" : "0", row.any_case_below ? "1" : "0"});
  return w.str();
}

inline nlohmann::json monitor_report_to_json(const MonitorReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : report.rows) {
    rows.push_back(nlohmann::json{{"week", row.week},
                                  {"domain", to_string(row.domain)},
                                  {"n", row.n},
                                  {"mean", row.mean},
                                  {"ci_low", row.ci_low},
                                  {"ci_high", row.ci_high},
                                  {"mean_below_threshold", row.mean_below},
                                  {"ci_below_threshold", row.ci_below},
                                  {"any_case_below_threshold", row.any_case_below}});
  }
  return nlohmann::json{{"schema_version", 1},
                        {"threshold", report.threshold},
                        {"n_reps", report.n_reps},
                        {"seed", report.seed},
                        {"rows", rows}};
}

}  // namespace tumorboard
