#pragma once

// Rater-agreement tables: exact agreement, Cohen's kappa and Gwet's AC1 for
// every rater pair, Fleiss' kappa with and without the machine rater, all
// with patient-clustered bootstrap CIs, stratified by generation method and
// overall.

#include <json.hpp>

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tumorboard/core/types.hpp"
#include "tumorboard/stats/agreement.hpp"
#include "tumorboard/stats/bootstrap.hpp"
#include "tumorboard/util/csv.hpp"

namespace tumorboard {

struct InsufficientOverlap : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One label assignment: rater X labeled rubric item (case, method, attribute).
struct LabelRow {
  std::string case_id;
  GenerationMethod method = GenerationMethod::SingleNote;
  std::string attribute_id;
  std::string rater_id;
  std::string label;
};

struct AgreementReportConfig {
  std::string machine_rater_id;  // empty = no machine rater in the data
  std::vector<std::string> label_alphabet = {"Yes", "Partial", "No"};
  int n_reps = 10000;
  std::uint64_t seed = 0;
  double level = 0.95;
};

struct AgreementReport {
  struct PairRow {
    std::string stratum;  // "Overall" or a generation method
    std::string rater_1;
    std::string rater_2;
    std::string coefficient;  // exact | cohen_kappa | gwet_ac1
    std::optional<double> estimate;
    std::optional<double> ci_low;
    std::optional<double> ci_high;
    int n_items = 0;
    bool degenerate = false;
  };
  struct FleissRow {
    std::string stratum;
    bool with_machine = false;
    std::optional<double> estimate;
    std::optional<double> ci_low;
    std::optional<double> ci_high;
    int n_items = 0;
    bool degenerate = false;
  };
  std::vector<PairRow> pairwise;
  std::vector<FleissRow> fleiss;
  int n_reps = 0;
  std::uint64_t seed = 0;
};

namespace agreement_detail {

struct Item {
  std::string cluster_id;  // patient/case
  std::map<std::string, std::string> labels;  // rater -> label
};

using PairObs = std::pair<std::string, stats::LabelPair>;  // (cluster, labels)

inline std::optional<double> optional_estimate(const stats::AgreementResult& r) {
  return r.degenerate ? std::nullopt : r.estimate;
}

}  // namespace agreement_detail

inline AgreementReport agreement_report(const std::vector<LabelRow>& rows,
                                        const AgreementReportConfig& config = {}) {
  using agreement_detail::Item;

  std::set<std::string> raters;
  for (const auto& r : rows) raters.insert(r.rater_id);
  if (raters.size() < 2)
    throw InsufficientOverlap("agreement needs labels from at least 2 raters");

  // stratum -> (case, method, attribute) -> Item
  std::map<std::string, std::map<std::string, Item>> strata;
  for (const auto& r : rows) {
    std::string key = r.case_id + "\x1f" + to_string(r.method) + "\x1f" + r.attribute_id;
    for (const std::string stratum : {std::string("Overall"), std::string(to_string(r.method))}) {
      Item& item = strata[stratum][key];
      item.cluster_id = r.case_id;
      item.labels[r.rater_id] = r.label;
    }
  }

  std::vector<std::string> rater_list(raters.begin(), raters.end());
  AgreementReport report;
  report.n_reps = config.n_reps;
  report.seed = config.seed;

  bool any_overlap = false;
  for (const auto& [stratum, items] : strata) {
    // Pairwise coefficients.
    for (std::size_t i = 0; i < rater_list.size(); ++i) {
      for (std::size_t j = i + 1; j < rater_list.size(); ++j) {
        const std::string& r1 = rater_list[i];
        const std::string& r2 = rater_list[j];
        std::vector<agreement_detail::PairObs> obs;
        for (const auto& [key, item] : items) {
          auto a = item.labels.find(r1);
          auto b = item.labels.find(r2);
          if (a != item.labels.end() && b != item.labels.end())
            obs.push_back({item.cluster_id, {a->second, b->second}});
        }
        if (obs.empty()) continue;
        any_overlap = true;

        auto add_row = [&](const std::string& coefficient, auto metric) {
          AgreementReport::PairRow row;
          row.stratum = stratum;
          row.rater_1 = r1;
          row.rater_2 = r2;
          row.coefficient = coefficient;
          row.n_items = static_cast<int>(obs.size());
          std::vector<stats::LabelPair> all;
          for (const auto& [_, p] : obs) all.push_back(p);
          auto full = metric(all);
          if (!full) {
            row.degenerate = true;
            report.pairwise.push_back(row);
            return;
          }
          row.estimate = *full;
          auto ci = stats::cluster_bootstrap_ci_skip_undefined(
              obs,
              [&metric](const std::vector<stats::LabelPair>& sample) { return metric(sample); },
              config.n_reps, config.seed, config.level);
          row.ci_low = ci.ci_low;
          row.ci_high = ci.ci_high;
          report.pairwise.push_back(row);
        };

        add_row("exact", [](const std::vector<stats::LabelPair>& pairs) -> std::optional<double> {
          return stats::exact_agreement(pairs);
        });
        add_row("cohen_kappa",
                [](const std::vector<stats::LabelPair>& pairs) -> std::optional<double> {
                  return agreement_detail::optional_estimate(stats::cohen_kappa(pairs));
                });
        add_row("gwet_ac1",
                [&config](const std::vector<stats::LabelPair>& pairs) -> std::optional<double> {
                  return agreement_detail::optional_estimate(
                      stats::gwet_ac1(pairs, config.label_alphabet));
                });
      }
    }

    // Fleiss over rater sets: humans only, then humans plus the machine rater.
    std::vector<std::string> humans;
    for (const auto& r : rater_list)
      if (r != config.machine_rater_id) humans.push_back(r);
    std::vector<std::pair<std::vector<std::string>, bool>> rater_sets;
    if (humans.size() >= 2) rater_sets.push_back({humans, false});
    if (!config.machine_rater_id.empty() && raters.count(config.machine_rater_id) &&
        humans.size() >= 1)
      rater_sets.push_back({rater_list, true});

    for (const auto& [set_raters, with_machine] : rater_sets) {
      if (set_raters.size() < 2) continue;
      std::vector<std::pair<std::string, std::vector<std::string>>> obs;  // (cluster, labels)
      for (const auto& [key, item] : items) {
        std::vector<std::string> labels;
        for (const auto& r : set_raters) {
          auto it = item.labels.find(r);
          if (it == item.labels.end()) break;
          labels.push_back(it->second);
        }
        if (labels.size() == set_raters.size()) obs.push_back({item.cluster_id, labels});
      }
      if (obs.empty()) continue;

      auto metric = [&](const std::vector<std::vector<std::string>>& sample)
          -> std::optional<double> {
        auto counts = stats::category_counts(sample, config.label_alphabet);
        return agreement_detail::optional_estimate(stats::fleiss_kappa(counts));
      };

      AgreementReport::FleissRow row;
      row.stratum = stratum;
      row.with_machine = with_machine;
      row.n_items = static_cast<int>(obs.size());
      std::vector<std::vector<std::string>> all;
      for (const auto& [_, labels] : obs) all.push_back(labels);
      auto full = metric(all);
      if (!full) {
        row.degenerate = true;
      } else {
        row.estimate = *full;
        auto ci = stats::cluster_bootstrap_ci_skip_undefined(
            obs, metric, config.n_reps, config.seed, config.level);
        row.ci_low = ci.ci_low;
        row.ci_high = ci.ci_high;
      }
      report.fleiss.push_back(row);
    }
  }

  if (!any_overlap)
    throw InsufficientOverlap("no rubric item is labeled by two raters");
  return report;
}

inline std::string agreement_pairwise_to_csv(const AgreementReport& report) {
  auto fmt = [](std::optional<double> v) {
    if (!v) return std::string{};
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", *v);
    return std::string(buf);
  };
  csv::Writer w({"stratum", "rater_1", "rater_2", "coefficient", "estimate", "ci_low", "ci_high",
                 "n_items", "degenerate"});
  for (const auto& r : report.pairwise)
    w.write_row({r.stratum, r.rater_1, r.rater_2, r.coefficient, fmt(r.estimate), fmt(r.ci_low),
                 fmt(r.ci_high), std::to_string(r.n_items), r.degenerate ? "1" : "0"});
  return w.str();
}

inline std::string agreement_fleiss_to_csv(const AgreementReport& report) {
  auto fmt = [](std::optional<double> v) {
    if (!v) return std::string{};
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", *v);
    return std::string(buf);
  };
  csv::Writer w({"stratum", "raters", "estimate", "ci_low", "ci_high", "n_items", "degenerate"});
  for (const auto& r : report.fleiss)
    w.write_row({r.stratum, r.with_machine ? "with_machine" : "human_only", fmt(r.estimate),
                 fmt(r.ci_low), fmt(r.ci_high), std::to_string(r.n_items),
                 r.degenerate ? "1" : "0"});
  return w.str();
}

inline nlohmann::json agreement_report_to_json(const AgreementReport& report) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["n_reps"] = report.n_reps;
  j["seed"] = report.seed;
  nlohmann::json pairwise = nlohmann::json::array();
  for (const auto& r : report.pairwise) {
    nlohmann::json o{{"stratum", r.stratum},     {"rater_1", r.rater_1},
                     {"rater_2", r.rater_2},     {"coefficient", r.coefficient},
                     {"n_items", r.n_items},     {"degenerate", r.degenerate}};
    if (r.estimate) o["estimate"] = *r.estimate;
    if (r.ci_low) o["ci_low"] = *r.ci_low;
    if (r.ci_high) o["ci_high"] = *r.ci_high;
    pairwise.push_back(o);
  }
  j["pairwise"] = pairwise;
  nlohmann::json fleiss = nlohmann::json::array();
  for (const auto& r : report.fleiss) {
    nlohmann::json o{{"stratum", r.stratum},
                     {"raters", r.with_machine ? "with_machine" : "human_only"},
                     {"n_items", r.n_items},
                     {"degenerate", r.degenerate}};
    if (r.estimate) o["estimate"] = *r.estimate;
    if (r.ci_low) o["ci_low"] = *r.ci_low;
    if (r.ci_high) o["ci_high"] = *r.ci_high;
    fleiss.push_back(o);
  }
  j["fleiss"] = fleiss;
  return j;
}

// Labels CSV: case_id, method, attribute_id, rater_id, label.
inline std::vector<LabelRow> labels_from_csv(const csv::Table& table) {
  std::vector<LabelRow> rows;
  int c_case = table.column("case_id");
  int c_method = table.column("method");
  int c_attr = table.column("attribute_id");
  int c_rater = table.column("rater_id");
  int c_label = table.column("label");
  for (const auto& r : table.rows) {
    rows.push_back(LabelRow{r[c_case], method_from_string(r[c_method]), r[c_attr], r[c_rater],
                            r[c_label]});
  }
  return rows;
}

}  // namespace tumorboard
