#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tumorboard/stats/ranking.hpp"

namespace tumorboard::stats {

struct DegenerateVariance : StatsError {
  DegenerateVariance() : StatsError("correlation undefined: zero variance input") {}
};

enum class CorrelationMethod { Pearson, Spearman };

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw StatsError("correlation needs equal lengths >= 2");
  double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateVariance();
  return sxy / std::sqrt(sxx * syy);
}

inline double correlation(const std::vector<double>& x, const std::vector<double>& y,
                          CorrelationMethod method) {
  if (method == CorrelationMethod::Pearson) return pearson(x, y);
  return pearson(average_ranks(x), average_ranks(y));
}

}  // namespace tumorboard::stats
