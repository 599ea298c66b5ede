#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "pgbj/log.hpp"
#include "pgbj/metric.hpp"
#include "pgbj/random.hpp"

namespace pgbj {

enum class PivotStrategy { RANDOM, FARTHEST, KMEANS };

inline std::string_view to_string(PivotStrategy s) {
  switch (s) {
    case PivotStrategy::RANDOM: return "RANDOM";
    case PivotStrategy::FARTHEST: return "FARTHEST";
    case PivotStrategy::KMEANS: return "KMEANS";
  }
  return "?";
}

inline PivotStrategy parse_pivot_strategy(std::string_view s) {
  if (s == "RANDOM" || s == "random") return PivotStrategy::RANDOM;
  if (s == "FARTHEST" || s == "farthest") return PivotStrategy::FARTHEST;
  if (s == "KMEANS" || s == "kmeans") return PivotStrategy::KMEANS;
  throw Error("unknown pivot strategy '" + std::string(s) + "'");
}

struct SelectionConfig {
  PivotStrategy strategy = PivotStrategy::RANDOM;
  std::size_t num_pivots = 1;
  std::size_t num_trials = 5;      // RANDOM
  std::size_t sample_size = 0;     // FARTHEST / KMEANS; 0 selects min(|R|, 10 * num_pivots)
  std::size_t max_iterations = 20; // KMEANS
  std::uint64_t seed = 0;

  std::size_t effective_sample_size(std::size_t dataset_size) const {
    if (sample_size != 0) return std::min(sample_size, dataset_size);
    return std::min(dataset_size, 10 * num_pivots);
  }
};

/// The ordered pivots defining the Voronoi partitioning. Pivot ids are 0..m-1.
struct PivotSet {
  std::vector<DataPoint> pivots;
  MetricKind metric = MetricKind::L2;

  std::size_t size() const { return pivots.size(); }
  const DataPoint& operator[](std::size_t i) const { return pivots[i]; }
  std::size_t dim() const { return pivots.empty() ? 0 : pivots.front().dim(); }
};

namespace detail {

// Partial Fisher-Yates: `count` distinct indices from [0, n), returned ascending.
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count,
                                               std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  count = std::min(count, n);
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline double pairwise_distance_sum(const std::vector<const DataPoint*>& pts, MetricKind metric) {
  double total = 0.0;
  for (std::size_t a = 0; a < pts.size(); ++a) {
    for (std::size_t b = a + 1; b < pts.size(); ++b) total += distance(*pts[a], *pts[b], metric);
  }
  return total;
}

/// Iterative farthest selection over `sample`, starting from sample[first].
/// Step i picks the unselected point maximizing the summed distance to the
/// pivots chosen so far (ties to the lowest sample index). Returns sample
/// indices in selection order.
inline std::vector<std::size_t> farthest_order(const std::vector<DataPoint>& sample,
                                               std::size_t first, std::size_t count,
                                               MetricKind metric) {
  if (sample.empty()) throw Error("farthest selection: empty sample");
  if (first >= sample.size()) throw Error("farthest selection: first pivot out of range");
  count = std::min(count, sample.size());
  std::vector<std::size_t> order{first};
  std::vector<bool> taken(sample.size(), false);
  taken[first] = true;
  std::vector<double> sum(sample.size(), 0.0);
  while (order.size() < count) {
    const DataPoint& last = sample[order.back()];
    std::size_t best = sample.size();
    double best_sum = -1.0;
    for (std::size_t c = 0; c < sample.size(); ++c) {
      if (taken[c]) continue;
      sum[c] += distance(sample[c], last, metric);
      if (sum[c] > best_sum) {
        best_sum = sum[c];
        best = c;
      }
    }
    taken[best] = true;
    order.push_back(best);
  }
  return order;
}

inline std::size_t nearest_center(const DataPoint& p, const std::vector<DataPoint>& centers,
                                  MetricKind metric, double* dist_out = nullptr) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double d = distance(p, centers[c], metric);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (dist_out) *dist_out = best_d;
  return best;
}

/// Lloyd iterations from the given initial centers. Stops when assignments
/// no longer change or after max_iterations. A center left without members
/// is moved onto the point lying farthest from its own center.
inline std::vector<DataPoint> lloyd(const std::vector<DataPoint>& sample,
                                    std::vector<DataPoint> centers, std::size_t max_iterations,
                                    MetricKind metric) {
  const std::size_t n = sample.empty() ? 0 : sample.front().dim();
  std::vector<std::size_t> assign(sample.size(), std::numeric_limits<std::size_t>::max());
  std::vector<double> dist(sample.size(), 0.0);
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (std::size_t p = 0; p < sample.size(); ++p) {
      const std::size_t c = nearest_center(sample[p], centers, metric, &dist[p]);
      if (c != assign[p]) {
        assign[p] = c;
        changed = true;
      }
    }
    if (!changed) break;

    std::vector<std::vector<double>> acc(centers.size(), std::vector<double>(n, 0.0));
    std::vector<std::size_t> members(centers.size(), 0);
    for (std::size_t p = 0; p < sample.size(); ++p) {
      ++members[assign[p]];
      for (std::size_t d = 0; d < n; ++d) acc[assign[p]][d] += sample[p].coords[d];
    }
    for (std::size_t c = 0; c < centers.size(); ++c) {
      if (members[c] == 0) continue;
      for (std::size_t d = 0; d < n; ++d) {
        centers[c].coords[d] = acc[c][d] / static_cast<double>(members[c]);
      }
    }
    for (std::size_t c = 0; c < centers.size(); ++c) {
      if (members[c] != 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t p = 0; p < sample.size(); ++p) {
        if (dist[p] > far_d) {
          far_d = dist[p];
          far = p;
        }
      }
      log_info("k-means: center " + std::to_string(c) + " lost all members, re-seeded on sample point " +
               std::to_string(sample[far].id));
      centers[c].coords = sample[far].coords;
      dist[far] = 0.0;
      // Force another assignment pass.
      assign[far] = std::numeric_limits<std::size_t>::max();
    }
  }
  return centers;
}

inline std::vector<DataPoint> draw_sample(const Dataset& R, std::size_t size, std::mt19937_64& rng) {
  std::vector<DataPoint> sample;
  for (std::size_t i : sample_indices(R.size(), size, rng)) sample.push_back(R.points[i]);
  return sample;
}

}  // namespace detail

/// Drops coordinate duplicates (keeping the first) and renumbers ids 0..m-1.
inline PivotSet make_pivot_set(std::vector<DataPoint> candidates, MetricKind metric) {
  PivotSet out;
  out.metric = metric;
  std::size_t removed = 0;
  for (auto& c : candidates) {
    const bool dup = std::any_of(out.pivots.begin(), out.pivots.end(),
                                 [&](const DataPoint& p) { return p.coords == c.coords; });
    if (dup) {
      ++removed;
      continue;
    }
    c.id = out.pivots.size();
    out.pivots.push_back(std::move(c));
  }
  if (removed > 0) log_info("removed " + std::to_string(removed) + " duplicate pivot(s)");
  if (out.pivots.empty()) throw Error("pivot set is empty");
  return out;
}

inline PivotSet select_random(const Dataset& R, const SelectionConfig& cfg,
                              MetricKind metric = MetricKind::L2) {
  if (cfg.num_pivots == 0) throw Error("num_pivots must be positive");
  if (cfg.num_pivots > R.size()) {
    throw Error("num_pivots (" + std::to_string(cfg.num_pivots) + ") exceeds |R| (" +
                std::to_string(R.size()) + ")");
  }
  const SeedTree seeds = SeedTree(cfg.seed).split("pivots.random");
  const std::size_t trials = std::max<std::size_t>(1, cfg.num_trials);
  std::vector<std::size_t> best;
  double best_total = -1.0;
  for (std::size_t t = 0; t < trials; ++t) {
    auto rng = seeds.split(t).engine();
    auto idx = detail::sample_indices(R.size(), cfg.num_pivots, rng);
    std::vector<const DataPoint*> pts;
    for (std::size_t i : idx) pts.push_back(&R.points[i]);
    const double total = detail::pairwise_distance_sum(pts, metric);
    if (total > best_total) {
      best_total = total;
      best = std::move(idx);
    }
  }
  std::vector<DataPoint> chosen;
  for (std::size_t i : best) chosen.push_back(R.points[i]);
  return make_pivot_set(std::move(chosen), metric);
}

inline PivotSet select_farthest(const Dataset& R, const SelectionConfig& cfg,
                                MetricKind metric = MetricKind::L2) {
  if (cfg.num_pivots == 0) throw Error("num_pivots must be positive");
  auto rng = SeedTree(cfg.seed).split("pivots.farthest").engine();
  const auto sample = detail::draw_sample(R, cfg.effective_sample_size(R.size()), rng);
  if (sample.empty()) throw Error("farthest selection: empty sample");
  if (cfg.num_pivots > sample.size()) {
    throw Error("num_pivots exceeds sample size " + std::to_string(sample.size()));
  }
  std::uniform_int_distribution<std::size_t> pick(0, sample.size() - 1);
  const std::size_t first = pick(rng);
  std::vector<DataPoint> chosen;
  for (std::size_t i : detail::farthest_order(sample, first, cfg.num_pivots, metric)) {
    chosen.push_back(sample[i]);
  }
  return make_pivot_set(std::move(chosen), metric);
}

inline PivotSet select_kmeans(const Dataset& R, const SelectionConfig& cfg,
                              MetricKind metric = MetricKind::L2) {
  if (cfg.num_pivots == 0) throw Error("num_pivots must be positive");
  auto rng = SeedTree(cfg.seed).split("pivots.kmeans").engine();
  const auto sample = detail::draw_sample(R, cfg.effective_sample_size(R.size()), rng);
  if (sample.empty()) throw Error("k-means selection: empty sample");
  if (cfg.num_pivots > sample.size()) {
    throw Error("num_pivots exceeds sample size " + std::to_string(sample.size()));
  }
  std::vector<DataPoint> init;
  for (std::size_t i : detail::sample_indices(sample.size(), cfg.num_pivots, rng)) {
    init.push_back(sample[i]);
  }
  auto centers = detail::lloyd(sample, std::move(init), std::max<std::size_t>(1, cfg.max_iterations), metric);
  return make_pivot_set(std::move(centers), metric);
}

inline PivotSet select_pivots(const Dataset& R, const SelectionConfig& cfg,
                              MetricKind metric = MetricKind::L2) {
  switch (cfg.strategy) {
    case PivotStrategy::RANDOM: return select_random(R, cfg, metric);
    case PivotStrategy::FARTHEST: return select_farthest(R, cfg, metric);
    case PivotStrategy::KMEANS: return select_kmeans(R, cfg, metric);
  }
  throw Error("unknown pivot strategy");
}

}  // namespace pgbj
