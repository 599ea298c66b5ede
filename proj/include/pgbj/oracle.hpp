#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "pgbj/knn.hpp"
#include "pgbj/metric.hpp"
#include "pgbj/parallel.hpp"

namespace pgbj {

/// Exact kNN join by exhaustive scan: every (r, s) distance, full sort per r.
/// Ties at equal distance go to the smaller s id. No pruning of any kind.
inline JoinResult brute_force_knn_join(const Dataset& R, const Dataset& S, std::size_t k,
                                       MetricKind metric = MetricKind::L2, std::size_t workers = 1) {
  if (k == 0) throw Error("k must be positive");
  if (k > S.size()) {
    throw Error("k (" + std::to_string(k) + ") exceeds |S| (" + std::to_string(S.size()) +
                "); the kNN join would degrade to a cross join");
  }
  JoinResult out;
  out.rows.resize(R.size());
  parallel_for(R.size(), workers, [&](std::size_t i) {
    const DataPoint& r = R.points[i];
    std::vector<Neighbor> all;
    all.reserve(S.size());
    for (const DataPoint& s : S.points) all.push_back({s.id, distance(r, s, metric)});
    std::sort(all.begin(), all.end(), closer);
    all.resize(k);
    out.rows[i] = {r.id, std::move(all)};
  });
  out.sort_rows();
  return out;
}

}  // namespace pgbj
