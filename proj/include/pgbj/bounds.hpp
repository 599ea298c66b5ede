#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "pgbj/metric.hpp"
#include "pgbj/partitioner.hpp"
#include "pgbj/pivots.hpp"

namespace pgbj {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Symmetric matrix of pivot-to-pivot distances with a zero diagonal.
class PivotDistanceCache {
 public:
  PivotDistanceCache() = default;
  explicit PivotDistanceCache(const PivotSet& pv) : m_(pv.size()), d_(m_ * m_, 0.0) {
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = i + 1; j < m_; ++j) {
        const double v = distance(pv[i], pv[j], pv.metric);
        d_[i * m_ + j] = v;
        d_[j * m_ + i] = v;
      }
    }
  }

  std::size_t size() const { return m_; }
  double operator()(std::size_t i, std::size_t j) const { return d_[i * m_ + j]; }

 private:
  std::size_t m_ = 0;
  std::vector<double> d_;
};

// Distance from o to the bisector HP(p_i, p_j), for o in p_j's cell:
// (|o,p_i|^2 - |o,p_j|^2) / (2 |p_i,p_j|). Exact in Euclidean space only.
inline double hyperplane_distance(double dist_to_pi, double dist_to_pj, double pivot_gap) {
  if (!(pivot_gap > 0.0)) throw Error("hyperplane_distance: coincident pivots");
  return (dist_to_pi * dist_to_pi - dist_to_pj * dist_to_pj) / (2.0 * pivot_gap);
}

/// Lower bound on |q, o| for every o in the cell of `other` when q lies in
/// the cell of `own`. L2 uses the exact hyperplane distance; L1 and LINF
/// fall back to the metric-space form (|q,p_other| - |q,p_own|) / 2,
/// since the bisector geometry does not hold there.
inline double hyperplane_bound(MetricKind metric, double dist_to_own, double dist_to_other,
                               double pivot_gap) {
  if (metric == MetricKind::L2) return hyperplane_distance(dist_to_other, dist_to_own, pivot_gap);
  return (dist_to_other - dist_to_own) / 2.0;
}

/// Necessary condition for |q, o| <= theta given o's pivot distance:
/// max{L, |p,q| - theta} <= |p,o| <= min{U, |p,q| + theta}.
inline bool annulus_admits(double q_pivot_dist, double s_pivot_dist, double theta, double lower,
                           double upper) {
  return std::max(lower, q_pivot_dist - theta) <= s_pivot_dist &&
         s_pivot_dist <= std::min(upper, q_pivot_dist + theta);
}

inline double ub_point(double upper_r, double pivot_gap, double s_pivot_dist) {
  return upper_r + pivot_gap + s_pivot_dist;
}

inline double lb_point(double pivot_gap, double upper_r, double s_pivot_dist) {
  return std::max(0.0, pivot_gap - upper_r - s_pivot_dist);
}

/// Upper bound on the k-th neighbor distance shared by every object of R-partition i:
/// the k-th smallest ub(s, P_i^R) over the per-partition pivot-kNN distances in t_s.
/// A partition's ascending list is abandoned at the first value that cannot
/// improve the queue.
inline double bound_knn_theta(std::size_t i, const SummaryTables& tables,
                              const PivotDistanceCache& cache, std::size_t k) {
  if (k == 0) throw Error("bound_knn_theta: k must be positive");
  if (tables.t_r.at(i).empty()) throw Error("bound_knn_theta: R-partition " + std::to_string(i) + " is empty");
  const double upper_r = tables.t_r[i].upper;
  std::priority_queue<double> queue;
  for (std::size_t j = 0; j < tables.num_partitions(); ++j) {
    for (double d : tables.t_s[j].knn_dists) {
      const double ub = ub_point(upper_r, cache(i, j), d);
      if (queue.size() < k) {
        queue.push(ub);
      } else if (queue.top() > ub) {
        queue.pop();
        queue.push(ub);
      } else {
        break;
      }
    }
  }
  if (queue.size() < k) {
    throw Error("bound_knn_theta: only " + std::to_string(queue.size()) +
                " candidate(s) for k = " + std::to_string(k) + " (k must not exceed |S|)");
  }
  return queue.top();
}

/// theta_i per R-partition; +inf for empty partitions (never consulted).
struct ThetaTable {
  std::vector<double> theta;

  std::size_t size() const { return theta.size(); }
  double operator[](std::size_t i) const { return theta[i]; }
  friend bool operator==(const ThetaTable&, const ThetaTable&) = default;
};

inline ThetaTable compute_thetas(const SummaryTables& tables, const PivotDistanceCache& cache,
                                 std::size_t k) {
  ThetaTable out;
  out.theta.assign(tables.num_partitions(), kInf);
  for (std::size_t i = 0; i < tables.num_partitions(); ++i) {
    if (!tables.t_r[i].empty()) out.theta[i] = bound_knn_theta(i, tables, cache, k);
  }
  return out;
}

/// Replication thresholds: an object s of S-partition j is sent to
/// R-partition i only if |s, p_j| >= at(j, i). Entries may be negative.
struct LBTable {
  std::size_t m = 0;
  std::vector<double> lb;  // row-major [j * m + i]

  double at(std::size_t j, std::size_t i) const { return lb[j * m + i]; }
  double& at(std::size_t j, std::size_t i) { return lb[j * m + i]; }
  friend bool operator==(const LBTable&, const LBTable&) = default;
};

/// Entries are |p_i,p_j| - U(P_i^R) - (theta_i + slack). Rows of empty
/// S-partitions and columns of empty R-partitions hold +inf.
inline LBTable build_lb_table(const SummaryTables& tables, const ThetaTable& thetas,
                              const PivotDistanceCache& cache, double slack = 0.0) {
  const std::size_t m = tables.num_partitions();
  LBTable out{m, std::vector<double>(m * m, kInf)};
  for (std::size_t j = 0; j < m; ++j) {
    if (tables.t_s[j].empty()) continue;
    for (std::size_t i = 0; i < m; ++i) {
      if (tables.t_r[i].empty()) continue;
      out.at(j, i) = cache(i, j) - tables.t_r[i].upper - (thetas[i] + slack);
    }
  }
  return out;
}

}  // namespace pgbj
