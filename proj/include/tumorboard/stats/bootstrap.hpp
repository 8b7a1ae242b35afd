#pragma once

// Percentile bootstrap with resampling clustered at the patient level.
// Determinism contract: for a fixed master seed the interval is identical
// across runs and independent of parallelism, because every replicate derives
// its own seed from (master seed, replicate index).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tumorboard/stats/ranking.hpp"
#include "tumorboard/util/rng.hpp"

namespace tumorboard::stats {

struct MetricFailure : StatsError {
  explicit MetricFailure(int replicate_, const std::string& why)
      : StatsError("metric failed on bootstrap replicate " + std::to_string(replicate_) + ": " + why),
        replicate(replicate_) {}
  int replicate;
};

struct BootstrapInterval {
  double estimate = 0;
  double ci_low = 0;
  double ci_high = 0;
  int n_reps = 0;
  int n_skipped = 0;  // replicates where the metric was undefined (skip variant)
};

namespace detail {

// Linear-interpolation quantile over a sorted sample.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::nan("");
  if (sorted.size() == 1) return sorted[0];
  double h = q * static_cast<double>(sorted.size() - 1);
  std::size_t lo = static_cast<std::size_t>(std::floor(h));
  std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

template <typename Item>
std::vector<std::vector<Item>> group_clusters(
    const std::vector<std::pair<std::string, Item>>& items) {
  std::vector<std::vector<Item>> clusters;
  std::map<std::string, std::size_t> index;  // cluster id -> slot (first appearance order)
  for (const auto& [cluster_id, item] : items) {
    auto it = index.find(cluster_id);
    if (it == index.end()) {
      index.emplace(cluster_id, clusters.size());
      clusters.push_back({item});
    } else {
      clusters[it->second].push_back(item);
    }
  }
  return clusters;
}

}  // namespace detail

// items: (cluster_id, item) pairs; metric: callable on std::vector<Item>.
// Metric errors abort with MetricFailure naming the replicate.
template <typename Item, typename Metric>
BootstrapInterval cluster_bootstrap_ci(const std::vector<std::pair<std::string, Item>>& items,
                                       Metric metric, int n_reps = 10000,
                                       std::uint64_t seed = 0, double level = 0.95) {
  if (items.empty()) throw EmptyInput();
  auto clusters = detail::group_clusters(items);
  std::size_t n_clusters = clusters.size();

  std::vector<Item> all;
  for (const auto& c : clusters) all.insert(all.end(), c.begin(), c.end());
  BootstrapInterval out;
  out.n_reps = n_reps;
  try {
    out.estimate = metric(all);
  } catch (const std::exception& e) {
    throw MetricFailure(-1, e.what());
  }

  std::vector<double> stats;
  stats.reserve(static_cast<std::size_t>(n_reps));
  for (int rep = 0; rep < n_reps; ++rep) {
    rng::Prng prng(rng::derive_seed(seed, static_cast<std::uint64_t>(rep)));
    std::vector<Item> sample;
    sample.reserve(all.size());
    for (std::size_t c = 0; c < n_clusters; ++c) {
      const auto& pick = clusters[prng.below(n_clusters)];
      sample.insert(sample.end(), pick.begin(), pick.end());
    }
    try {
      stats.push_back(metric(sample));
    } catch (const std::exception& e) {
      throw MetricFailure(rep, e.what());
    }
  }
  std::sort(stats.begin(), stats.end());
  double alpha = 1.0 - level;
  out.ci_low = detail::quantile_sorted(stats, alpha / 2.0);
  out.ci_high = detail::quantile_sorted(stats, 1.0 - alpha / 2.0);
  return out;
}

// Variant for metrics that can be undefined on a resample (e.g. a
// chance-corrected coefficient when a replicate collapses to one category):
// undefined replicates are skipped and counted.
template <typename Item, typename Metric>
BootstrapInterval cluster_bootstrap_ci_skip_undefined(
    const std::vector<std::pair<std::string, Item>>& items, Metric metric, int n_reps = 10000,
    std::uint64_t seed = 0, double level = 0.95) {
  if (items.empty()) throw EmptyInput();
  auto clusters = detail::group_clusters(items);
  std::size_t n_clusters = clusters.size();

  std::vector<Item> all;
  for (const auto& c : clusters) all.insert(all.end(), c.begin(), c.end());
  BootstrapInterval out;
  out.n_reps = n_reps;
  std::optional<double> estimate = metric(all);
  if (!estimate) throw MetricFailure(-1, "metric undefined on the full sample");
  out.estimate = *estimate;

  std::vector<double> stats;
  stats.reserve(static_cast<std::size_t>(n_reps));
  for (int rep = 0; rep < n_reps; ++rep) {
    rng::Prng prng(rng::derive_seed(seed, static_cast<std::uint64_t>(rep)));
    std::vector<Item> sample;
    sample.reserve(all.size());
    for (std::size_t c = 0; c < n_clusters; ++c) {
      const auto& pick = clusters[prng.below(n_clusters)];
      sample.insert(sample.end(), pick.begin(), pick.end());
    }
    std::optional<double> value = metric(sample);
    if (value) stats.push_back(*value);
    else ++out.n_skipped;
  }
  std::sort(stats.begin(), stats.end());
  double alpha = 1.0 - level;
  out.ci_low = detail::quantile_sorted(stats, alpha / 2.0);
  out.ci_high = detail::quantile_sorted(stats, 1.0 - alpha / 2.0);
  return out;
}

}  // namespace tumorboard::stats
