#pragma once

// Method-vs-baseline comparison tables: per-case fact-score proportions,
// Friedman across methods, paired Wilcoxon against the baseline with BH
// adjustment inside explicitly declared families, the pooled by-type matrix,
// and diverging Likert distributions for the subjective domains.

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tumorboard/core/types.hpp"
#include "tumorboard/judge/judge.hpp"
#include "tumorboard/ratings/ratings.hpp"
#include "tumorboard/stats/adjust.hpp"
#include "tumorboard/stats/rank_tests.hpp"
#include "tumorboard/util/csv.hpp"

namespace tumorboard {

struct NoCompleteCases : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kSignificanceAlpha = 0.05;

struct MethodComparisonRow {
  GenerationMethod method = GenerationMethod::SingleNote;
  int n_pairs = 0;
  double mean = 0;
  double baseline_mean = 0;
  std::optional<double> v_statistic;
  std::optional<double> p_raw;
  std::optional<double> p_adj;
  bool significant = false;
  std::string note;  // "all differences zero" and similar
};

struct LikertDistributionRow {
  RatingDomain domain = RatingDomain::Overall;
  GenerationMethod method = GenerationMethod::SingleNote;
  int n = 0;
  std::array<int, 5> counts{};  // final scores 1..5
};

struct ComparisonReport {
  GenerationMethod baseline = GenerationMethod::SecureGPT;

  struct CaseRow {
    std::string case_id;
    GenerationMethod method;
    int n_items;
    double fully_present;
    double fully_or_partial;
  };
  std::vector<CaseRow> case_rows;

  // keyed by outcome definition: "fully_present" | "fully_or_partial"
  std::map<std::string, stats::TestResult> friedman;
  std::map<std::string, std::vector<MethodComparisonRow>> fact_comparisons;

  // method -> attribute type -> pooled counts
  std::map<std::string, std::map<std::string, TypeScore>> by_type;

  std::vector<LikertDistributionRow> likert;
  std::map<std::string, std::vector<MethodComparisonRow>> subjective_comparisons;  // by domain

  std::vector<std::string> exclusions;  // human-readable exclusion log
  nlohmann::json families = nlohmann::json::array();  // declared BH families
};

namespace report_detail {

inline std::vector<GenerationMethod> ordered_methods(const std::set<std::string>& names) {
  static constexpr GenerationMethod canonical[] = {
      GenerationMethod::Physician,     GenerationMethod::SecureGPT,
      GenerationMethod::SingleNote,    GenerationMethod::SingleStep,
      GenerationMethod::MultiStep,     GenerationMethod::MultiAgentLow,
      GenerationMethod::MultiAgentHigh};
  std::vector<GenerationMethod> out;
  for (auto m : canonical)
    if (names.count(to_string(m))) out.push_back(m);
  return out;
}

// Paired Wilcoxon of method vs baseline over the pairwise-complete case set.
inline MethodComparisonRow compare_against_baseline(
    const std::map<std::string, double>& method_values,
    const std::map<std::string, double>& baseline_values, GenerationMethod method) {
  MethodComparisonRow row;
  row.method = method;
  std::vector<std::pair<double, double>> paired;
  double m_sum = 0, b_sum = 0;
  for (const auto& [case_id, value] : method_values) {
    auto it = baseline_values.find(case_id);
    if (it == baseline_values.end()) continue;
    paired.push_back({value, it->second});
    m_sum += value;
    b_sum += it->second;
  }
  row.n_pairs = static_cast<int>(paired.size());
  if (row.n_pairs == 0) {
    row.note = "no paired cases";
    return row;
  }
  row.mean = m_sum / row.n_pairs;
  row.baseline_mean = b_sum / row.n_pairs;
  try {
    auto test = stats::wilcoxon_signed_rank(paired);
    row.v_statistic = test.statistic;
    row.p_raw = test.p_value;
  } catch (const stats::AllZeroDifferences&) {
    // No evidence of any difference; keep the comparison in its declared
    // family with p = 1 rather than silently shrinking the family.
    row.p_raw = 1.0;
    row.note = "all differences zero";
  }
  return row;
}

inline void adjust_family(std::vector<MethodComparisonRow>& rows, double alpha) {
  std::vector<double> raw;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].p_raw) {
      raw.push_back(*rows[i].p_raw);
      idx.push_back(i);
    }
  }
  if (raw.empty()) return;
  auto adjusted = stats::bh_adjust(raw);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    rows[idx[k]].p_adj = adjusted[k];
    rows[idx[k]].significant = adjusted[k] < alpha;
  }
}

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace report_detail

inline ComparisonReport comparison_report(const std::vector<FactScore>& fact_scores,
                                          const std::vector<RatingRecord>& subjective_ratings,
                                          GenerationMethod baseline,
                                          double alpha = kSignificanceAlpha) {
  ComparisonReport report;
  report.baseline = baseline;

  // definition -> method -> case -> value
  std::map<std::string, std::map<std::string, std::map<std::string, double>>> values;
  std::set<std::string> method_names;
  std::set<std::string> case_ids;
  for (const auto& fs : fact_scores) {
    std::string m = to_string(fs.method);
    method_names.insert(m);
    case_ids.insert(fs.case_id);
    values["fully_present"][m][fs.case_id] = fs.fully_present;
    values["fully_or_partial"][m][fs.case_id] = fs.fully_or_partial;
    report.case_rows.push_back(
        {fs.case_id, fs.method, fs.n_items, fs.fully_present, fs.fully_or_partial});
    for (const auto& [type, ts] : fs.by_type) {
      TypeScore& agg = report.by_type[m][type];
      agg.n_items += ts.n_items;
      agg.n_fully += ts.n_fully;
      agg.n_fully_or_partial += ts.n_fully_or_partial;
    }
  }
  std::sort(report.case_rows.begin(), report.case_rows.end(), [](const auto& a, const auto& b) {
    if (a.case_id != b.case_id) return a.case_id < b.case_id;
    return std::string(to_string(a.method)) < to_string(b.method);
  });

  if (!fact_scores.empty()) {
    std::string baseline_name = to_string(baseline);
    if (!method_names.count(baseline_name))
      throw NoCompleteCases("baseline method " + baseline_name + " absent from fact scores");
    auto methods = report_detail::ordered_methods(method_names);

    // Friedman needs fully-complete rows across every method present.
    std::vector<std::string> complete_cases;
    for (const auto& case_id : case_ids) {
      bool complete = true;
      for (auto m : methods)
        if (!values["fully_present"][to_string(m)].count(case_id)) complete = false;
      if (complete) complete_cases.push_back(case_id);
      else report.exclusions.push_back("case " + case_id + " excluded from Friedman (incomplete)");
    }
    if (complete_cases.empty()) throw NoCompleteCases("no case has every method's fact score");

    for (const auto& definition : {std::string("fully_present"), std::string("fully_or_partial")}) {
      std::vector<std::vector<double>> matrix;
      for (const auto& case_id : complete_cases) {
        std::vector<double> row;
        for (auto m : methods) row.push_back(values[definition][to_string(m)][case_id]);
        matrix.push_back(row);
      }
      report.friedman[definition] = stats::friedman_test(matrix);

      std::vector<MethodComparisonRow> rows;
      for (auto m : methods) {
        if (m == baseline || !is_generatable(m)) continue;
        rows.push_back(report_detail::compare_against_baseline(
            values[definition][to_string(m)], values[definition][to_string(baseline)], m));
      }
      report_detail::adjust_family(rows, alpha);
      report.fact_comparisons[definition] = rows;

      nlohmann::json family;
      family["name"] = "fact_score:" + definition;
      family["definition"] = definition;
      family["baseline"] = to_string(baseline);
      nlohmann::json members = nlohmann::json::array();
      for (const auto& r : rows) members.push_back(to_string(r.method));
      family["members"] = members;
      report.families.push_back(family);
    }
  }

  if (!subjective_ratings.empty()) {
    auto combined = combine_ratings(subjective_ratings);
    // domain -> method -> case -> final score
    std::map<std::string, std::map<std::string, std::map<std::string, double>>> scores;
    std::set<std::string> rating_methods;
    for (const auto& c : combined) {
      scores[to_string(c.domain)][to_string(c.method)][c.case_id] =
          static_cast<double>(c.final_score);
      rating_methods.insert(to_string(c.method));
    }
    auto methods = report_detail::ordered_methods(rating_methods);
    for (auto domain : kAllDomains) {
      for (auto m : methods) {
        LikertDistributionRow row;
        row.domain = domain;
        row.method = m;
        for (const auto& [case_id, score] : scores[to_string(domain)][to_string(m)]) {
          int s = static_cast<int>(score);
          if (s >= 1 && s <= 5) {
            ++row.counts[static_cast<std::size_t>(s - 1)];
            ++row.n;
          }
        }
        if (row.n > 0) report.likert.push_back(row);
      }
      if (rating_methods.count(to_string(baseline))) {
        std::vector<MethodComparisonRow> rows;
        for (auto m : methods) {
          if (m == baseline || !is_generatable(m)) continue;
          rows.push_back(report_detail::compare_against_baseline(
              scores[to_string(domain)][to_string(m)], scores[to_string(domain)][to_string(baseline)],
              m));
        }
        report_detail::adjust_family(rows, alpha);
        report.subjective_comparisons[to_string(domain)] = rows;

        nlohmann::json family;
        family["name"] = std::string("subjective:") + to_string(domain);
        family["baseline"] = to_string(baseline);
        nlohmann::json members = nlohmann::json::array();
        for (const auto& r : rows) members.push_back(to_string(r.method));
        family["members"] = members;
        report.families.push_back(family);
      }
    }
  }

  return report;
}

// --- serialization ----------------------------------------------------------

inline std::string case_rows_to_csv(const ComparisonReport& report) {
  csv::Writer w({"case_id", "method", "n_items", "fully_present", "fully_or_partial"});
  for (const auto& r : report.case_rows)
    w.write_row({r.case_id, to_string(r.method), std::to_string(r.n_items),
                 report_detail::fmt(r.fully_present), report_detail::fmt(r.fully_or_partial)});
  return w.str();
}

inline std::string fact_comparisons_to_csv(const ComparisonReport& report) {
  csv::Writer w({"definition", "method", "n_pairs", "mean", "baseline_mean", "V", "p_raw", "p_adj",
                 "significant", "note"});
  for (const auto& [definition, rows] : report.fact_comparisons) {
    for (const auto& r : rows) {
      w.write_row({definition, to_string(r.method), std::to_string(r.n_pairs),
                   report_detail::fmt(r.mean), report_detail::fmt(r.baseline_mean),
                   r.v_statistic ? report_detail::fmt(*r.v_statistic) : "",
                   r.p_raw ? report_detail::fmt(*r.p_raw) : "",
                   r.p_adj ? report_detail::fmt(*r.p_adj) : "", r.significant ? "*" : "", r.note});
    }
  }
  return w.str();
}

inline std::string friedman_to_csv(const ComparisonReport& report) {
  csv::Writer w({"definition", "statistic", "p_value", "n_cases", "detail"});
  for (const auto& [definition, t] : report.friedman)
    w.write_row({definition, report_detail::fmt(t.statistic), report_detail::fmt(t.p_value),
                 std::to_string(t.n_effective), t.detail});
  return w.str();
}

inline std::string by_type_to_csv(const ComparisonReport& report) {
  csv::Writer w({"method", "attribute_type", "n_items", "n_fully", "n_fully_or_partial",
                 "fully_present", "fully_or_partial"});
  for (const auto& [method, types] : report.by_type) {
    for (const auto& [type, ts] : types) {
      double fully = ts.n_items ? static_cast<double>(ts.n_fully) / ts.n_items : 0.0;
      double partial = ts.n_items ? static_cast<double>(ts.n_fully_or_partial) / ts.n_items : 0.0;
      w.write_row({method, type, std::to_string(ts.n_items), std::to_string(ts.n_fully),
                   std::to_string(ts.n_fully_or_partial), report_detail::fmt(fully),
                   report_detail::fmt(partial)});
    }
  }
  return w.str();
}

inline std::string likert_to_csv(const ComparisonReport& report) {
  csv::Writer w({"domain", "method", "n", "pct_1", "pct_2", "pct_3", "pct_4", "pct_5"});
  for (const auto& r : report.likert) {
    std::vector<std::string> fields{to_string(r.domain), to_string(r.method), std::to_string(r.n)};
    for (int s = 0; s < 5; ++s)
      fields.push_back(report_detail::fmt(
          r.n ? 100.0 * r.counts[static_cast<std::size_t>(s)] / r.n : 0.0));
    w.write_row(fields);
  }
  return w.str();
}

inline std::string subjective_comparisons_to_csv(const ComparisonReport& report) {
  csv::Writer w({"domain", "method", "n_pairs", "mean", "baseline_mean", "V", "p_raw", "p_adj",
                 "significant", "note"});
  for (const auto& [domain, rows] : report.subjective_comparisons) {
    for (const auto& r : rows) {
      w.write_row({domain, to_string(r.method), std::to_string(r.n_pairs),
                   report_detail::fmt(r.mean), report_detail::fmt(r.baseline_mean),
                   r.v_statistic ? report_detail::fmt(*r.v_statistic) : "",
                   r.p_raw ? report_detail::fmt(*r.p_raw) : "",
                   r.p_adj ? report_detail::fmt(*r.p_adj) : "", r.significant ? "*" : "", r.note});
    }
  }
  return w.str();
}

inline nlohmann::json comparison_report_to_json(const ComparisonReport& report) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["baseline"] = to_string(report.baseline);
  j["families"] = report.families;
  j["exclusions"] = report.exclusions;

  nlohmann::json cases = nlohmann::json::array();
  for (const auto& r : report.case_rows)
    cases.push_back(nlohmann::json{{"case_id", r.case_id},
                                   {"method", to_string(r.method)},
                                   {"n_items", r.n_items},
                                   {"fully_present", r.fully_present},
                                   {"fully_or_partial", r.fully_or_partial}});
  j["case_rows"] = cases;

  for (const auto& [definition, t] : report.friedman) {
    j["friedman"][definition] = {{"statistic", t.statistic},
                                 {"p_value", t.p_value},
                                 {"n_cases", t.n_effective},
                                 {"detail", t.detail}};
  }

  auto rows_json = [](const std::vector<MethodComparisonRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
      nlohmann::json o{{"method", to_string(r.method)},
                       {"n_pairs", r.n_pairs},
                       {"mean", r.mean},
                       {"baseline_mean", r.baseline_mean},
                       {"significant", r.significant},
                       {"note", r.note}};
      if (r.v_statistic) o["V"] = *r.v_statistic;
      if (r.p_raw) o["p_raw"] = *r.p_raw;
      if (r.p_adj) o["p_adj"] = *r.p_adj;
      arr.push_back(o);
    }
    return arr;
  };
  for (const auto& [definition, rows] : report.fact_comparisons)
    j["fact_comparisons"][definition] = rows_json(rows);
  for (const auto& [domain, rows] : report.subjective_comparisons)
    j["subjective_comparisons"][domain] = rows_json(rows);

  for (const auto& [method, types] : report.by_type) {
    for (const auto& [type, ts] : types) {
      j["by_type"][method][type] = {{"n_items", ts.n_items},
                                    {"n_fully", ts.n_fully},
                                    {"n_fully_or_partial", ts.n_fully_or_partial}};
    }
  }

  nlohmann::json likert = nlohmann::json::array();
  for (const auto& r : report.likert) {
    likert.push_back(nlohmann::json{{"domain", to_string(r.domain)},
                                    {"method", to_string(r.method)},
                                    {"n", r.n},
                                    {"counts", r.counts}});
  }
  j["likert"] = likert;
  return j;
}

}  // namespace tumorboard
