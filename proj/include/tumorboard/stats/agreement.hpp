#pragma once

// Inter-rater agreement coefficients: exact agreement, Cohen's kappa,
// Gwet's AC1, Fleiss' kappa. Chance-degenerate inputs (expected agreement 1)
// are reported with an explicit flag, never as a silent 0 or 1.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tumorboard/stats/ranking.hpp"

namespace tumorboard::stats {

using LabelPair = std::pair<std::string, std::string>;

// One rated unit for multi-rater statistics; cluster_id is the resampling
// unit (the patient) for clustered bootstrap CIs.
struct LabeledItem {
  std::string cluster_id;
  std::string item_id;
  std::map<std::string, std::string> labels;  // rater_id -> label
};

struct AgreementResult {
  std::string coefficient_name;
  std::optional<double> estimate;  // empty when degenerate
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  bool degenerate = false;
};

struct RaggedRaterCounts : StatsError {
  RaggedRaterCounts() : StatsError("every item must be rated by the same number of raters") {}
};

inline double exact_agreement(const std::vector<LabelPair>& pairs) {
  if (pairs.empty()) throw EmptyInput();
  std::size_t same = 0;
  for (const auto& [a, b] : pairs)
    if (a == b) ++same;
  return static_cast<double>(same) / static_cast<double>(pairs.size());
}

inline AgreementResult cohen_kappa(const std::vector<LabelPair>& pairs) {
  if (pairs.empty()) throw EmptyInput();
  double n = static_cast<double>(pairs.size());
  std::map<std::string, double> m1, m2;
  double agree = 0;
  for (const auto& [a, b] : pairs) {
    m1[a] += 1;
    m2[b] += 1;
    if (a == b) agree += 1;
  }
  double p_o = agree / n;
  double p_e = 0;
  for (const auto& [label, c1] : m1) {
    auto it = m2.find(label);
    if (it != m2.end()) p_e += (c1 / n) * (it->second / n);
  }
  AgreementResult r;
  r.coefficient_name = "cohen_kappa";
  if (p_e >= 1.0) {
    r.degenerate = true;
    return r;
  }
  r.estimate = (p_o - p_e) / (1.0 - p_e);
  return r;
}

// alphabet: the declared label set (chance term uses all K categories even if
// some never occur in this stratum). Empty = use the observed categories.
inline AgreementResult gwet_ac1(const std::vector<LabelPair>& pairs,
                                const std::vector<std::string>& alphabet = {}) {
  if (pairs.empty()) throw EmptyInput();
  double n = static_cast<double>(pairs.size());
  std::set<std::string> cats(alphabet.begin(), alphabet.end());
  std::map<std::string, double> m1, m2;
  double agree = 0;
  for (const auto& [a, b] : pairs) {
    m1[a] += 1;
    m2[b] += 1;
    cats.insert(a);
    cats.insert(b);
    if (a == b) agree += 1;
  }
  double p_o = agree / n;
  double k = static_cast<double>(cats.size());
  AgreementResult r;
  r.coefficient_name = "gwet_ac1";
  if (k < 2) {
    r.degenerate = true;
    return r;
  }
  double p_e = 0;
  for (const auto& cat : cats) {
    double pi = ((m1.count(cat) ? m1[cat] : 0.0) + (m2.count(cat) ? m2[cat] : 0.0)) / (2.0 * n);
    p_e += pi * (1.0 - pi);
  }
  p_e /= (k - 1.0);
  if (p_e >= 1.0) {
    r.degenerate = true;
    return r;
  }
  r.estimate = (p_o - p_e) / (1.0 - p_e);
  return r;
}

// items: per-item category counts; each row must sum to the same m >= 2.
inline AgreementResult fleiss_kappa(const std::vector<std::vector<double>>& items) {
  if (items.empty()) throw EmptyInput();
  double m = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    double row = 0;
    for (double c : items[i]) row += c;
    if (i == 0) m = row;
    else if (row != m) throw RaggedRaterCounts();
  }
  if (m < 2) throw RaggedRaterCounts();

  double n = static_cast<double>(items.size());
  std::size_t k = items[0].size();
  double p_bar = 0;
  std::vector<double> p_cat(k, 0.0);
  for (const auto& row : items) {
    double sum_sq = 0;
    for (std::size_t c = 0; c < k; ++c) {
      sum_sq += row[c] * row[c];
      p_cat[c] += row[c];
    }
    p_bar += (sum_sq - m) / (m * (m - 1.0));
  }
  p_bar /= n;
  double p_e = 0;
  for (std::size_t c = 0; c < k; ++c) {
    double p = p_cat[c] / (n * m);
    p_e += p * p;
  }
  AgreementResult r;
  r.coefficient_name = "fleiss_kappa";
  if (p_e >= 1.0) {
    r.degenerate = true;
    return r;
  }
  r.estimate = (p_bar - p_e) / (1.0 - p_e);
  return r;
}

// Convenience: per-item rater labels -> category-count matrix over the given
// alphabet (or the observed labels when the alphabet is empty).
inline std::vector<std::vector<double>> category_counts(
    const std::vector<std::vector<std::string>>& item_labels,
    std::vector<std::string> alphabet = {}) {
  if (alphabet.empty()) {
    std::set<std::string> seen;
    for (const auto& row : item_labels) seen.insert(row.begin(), row.end());
    alphabet.assign(seen.begin(), seen.end());
  }
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < alphabet.size(); ++i) index[alphabet[i]] = i;
  std::vector<std::vector<double>> counts;
  counts.reserve(item_labels.size());
  for (const auto& row : item_labels) {
    std::vector<double> c(alphabet.size(), 0.0);
    for (const auto& label : row) c[index.at(label)] += 1.0;
    counts.push_back(std::move(c));
  }
  return counts;
}

}  // namespace tumorboard::stats
