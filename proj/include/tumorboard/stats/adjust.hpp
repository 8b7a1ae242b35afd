#pragma once

// Benjamini-Hochberg step-up false-discovery-rate adjustment.

#include <algorithm>
#include <numeric>
#include <vector>

#include "tumorboard/stats/ranking.hpp"

namespace tumorboard::stats {

struct OutOfRange : StatsError {
  OutOfRange() : StatsError("p-values must lie in [0, 1]") {}
};

// Returns adjusted values in input order: p_(i) * m / i with a cumulative
// minimum applied from the largest rank downward, capped at 1.
inline std::vector<double> bh_adjust(const std::vector<double>& p_values) {
  for (double p : p_values)
    if (!(p >= 0.0 && p <= 1.0)) throw OutOfRange();
  std::size_t m = p_values.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
  std::vector<double> adjusted(m, 0.0);
  double running_min = 1.0;
  for (std::size_t i = m; i-- > 0;) {
    double scaled = p_values[order[i]] * static_cast<double>(m) / static_cast<double>(i + 1);
    running_min = std::min(running_min, scaled);
    adjusted[order[i]] = std::min(1.0, running_min);
  }
  return adjusted;
}

}  // namespace tumorboard::stats
