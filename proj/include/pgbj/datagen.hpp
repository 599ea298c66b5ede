#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pgbj/metric.hpp"
#include "pgbj/random.hpp"

namespace pgbj {

/// Distinct values of dimension `dim`, ordered by ascending frequency, ties
/// by ascending value. This order drives dataset expansion.
inline std::vector<double> expansion_value_order(const Dataset& O, std::size_t dim) {
  std::map<double, std::size_t> freq;
  for (const auto& p : O.points) ++freq[p.coords.at(dim)];
  std::vector<std::pair<std::size_t, double>> ranked;
  ranked.reserve(freq.size());
  for (const auto& [v, f] : freq) ranked.emplace_back(f, v);
  std::sort(ranked.begin(), ranked.end());
  std::vector<double> order;
  order.reserve(ranked.size());
  for (const auto& [f, v] : ranked) order.push_back(v);
  return order;
}

/// Grows O to factor * |O| points with the same per-dimension value
/// distribution. Copy c (1 <= c < factor) of object o takes, in each
/// dimension, the value c places after o's value in the frequency order,
/// clamped to the last value. New ids start at max id + 1 and are issued in
/// (copy, original id) order; the originals are kept verbatim and first.
inline Dataset expand_dataset(const Dataset& O, std::size_t factor) {
  if (factor < 1) throw Error("expansion factor must be >= 1");
  Dataset out = O;
  if (factor == 1 || O.empty()) return out;
  const std::size_t n = O.dim();

  std::vector<std::vector<double>> order(n);
  std::vector<std::map<double, std::size_t>> position(n);
  for (std::size_t d = 0; d < n; ++d) {
    order[d] = expansion_value_order(O, d);
    for (std::size_t x = 0; x < order[d].size(); ++x) position[d][order[d][x]] = x;
  }

  std::vector<const DataPoint*> by_id;
  for (const auto& p : O.points) by_id.push_back(&p);
  std::sort(by_id.begin(), by_id.end(), [](const DataPoint* a, const DataPoint* b) { return a->id < b->id; });
  PointId next_id = by_id.back()->id + 1;

  out.points.reserve(O.size() * factor);
  for (std::size_t c = 1; c < factor; ++c) {
    for (const DataPoint* o : by_id) {
      DataPoint q;
      q.id = next_id++;
      q.coords.resize(n);
      for (std::size_t d = 0; d < n; ++d) {
        const std::size_t last = order[d].size() - 1;
        q.coords[d] = order[d][std::min(position[d].at(o->coords[d]) + c, last)];
      }
      out.points.push_back(std::move(q));
    }
  }
  return out;
}

enum class SyntheticKind { UNIFORM, GAUSSIAN_MIXTURE };

inline SyntheticKind parse_synthetic_kind(std::string_view s) {
  if (s == "UNIFORM" || s == "uniform") return SyntheticKind::UNIFORM;
  if (s == "GAUSSIAN_MIXTURE" || s == "gaussian_mixture" || s == "gaussian") return SyntheticKind::GAUSSIAN_MIXTURE;
  throw Error("unknown synthetic kind '" + std::string(s) + "'");
}

inline constexpr double kClusterStddev = 0.02;

/// Seeded point cloud with ids 0..count-1. UNIFORM fills [0,1]^dim;
/// GAUSSIAN_MIXTURE draws `clusters` centers in [0,1]^dim and scatters
/// points around a uniformly chosen center with stddev 0.02 per axis.
inline Dataset generate_synthetic(SyntheticKind kind, std::size_t dim, std::size_t count, std::size_t clusters,
                                  std::uint64_t seed, std::string name = "synthetic") {
  if (dim == 0 || count == 0) throw Error("generate_synthetic: dim and count must be positive");
  if (kind == SyntheticKind::GAUSSIAN_MIXTURE && clusters == 0) throw Error("generate_synthetic: clusters must be positive");
  const SeedTree seeds = SeedTree(seed).split("synthetic");
  auto rng = seeds.split("points").engine();
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Dataset ds;
  ds.name = std::move(name);
  ds.points.reserve(count);
  if (kind == SyntheticKind::UNIFORM) {
    for (std::size_t i = 0; i < count; ++i) {
      DataPoint p{i, std::vector<double>(dim)};
      for (auto& v : p.coords) v = unit(rng);
      ds.points.push_back(std::move(p));
    }
    return ds;
  }

  auto center_rng = seeds.split("centers").engine();
  std::vector<std::vector<double>> centers(clusters, std::vector<double>(dim));
  for (auto& c : centers) {
    for (auto& v : c) v = unit(center_rng);
  }
  std::uniform_int_distribution<std::size_t> pick(0, clusters - 1);
  std::normal_distribution<double> noise(0.0, kClusterStddev);
  for (std::size_t i = 0; i < count; ++i) {
    const auto& c = centers[pick(rng)];
    DataPoint p{i, std::vector<double>(dim)};
    for (std::size_t d = 0; d < dim; ++d) p.coords[d] = c[d] + noise(rng);
    ds.points.push_back(std::move(p));
  }
  return ds;
}

}  // namespace pgbj
