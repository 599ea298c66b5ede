#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pgbj {

/// min / max / mean / population standard deviation of a size list.
struct SizeStats {
  double min = 0.0;
  double max = 0.0;
  double avg = 0.0;
  double dev = 0.0;

  template <class Range>
  static SizeStats of(const Range& values) {
    SizeStats st;
    std::size_t n = 0;
    double sum = 0.0;
    for (auto v : values) {
      const double x = static_cast<double>(v);
      st.min = n == 0 ? x : std::min(st.min, x);
      st.max = n == 0 ? x : std::max(st.max, x);
      sum += x;
      ++n;
    }
    if (n == 0) return st;
    st.avg = sum / static_cast<double>(n);
    double sq = 0.0;
    for (auto v : values) {
      const double d = static_cast<double>(v) - st.avg;
      sq += d * d;
    }
    st.dev = std::sqrt(sq / static_cast<double>(n));
    return st;
  }
};

struct RunMetrics {
  std::string engine;
  std::size_t r_size = 0;
  std::size_t s_size = 0;
  std::size_t k = 0;
  std::size_t num_pivots = 0;
  std::size_t num_groups = 0;

  // R-S distance evaluations plus R-pivot object pairs.
  std::uint64_t pairs_computed = 0;
  std::uint64_t rs_pairs = 0;
  std::uint64_t pivot_pairs = 0;
  // Every object-pivot / pivot-pivot evaluation actually performed.
  std::uint64_t pivot_distance_evals = 0;
  double selectivity = 0.0;

  std::uint64_t shuffle_records_R = 0;
  std::uint64_t shuffle_records_S = 0;
  // Partial kNN records shipped to a merge job (block baseline only).
  std::uint64_t merge_records = 0;
  std::uint64_t predicted_replication = 0;
  double avg_replication_alpha = 0.0;

  std::vector<std::uint64_t> per_group_load;
  SizeStats group_size;
  SizeStats partition_size;
  std::size_t blocks_per_side = 0;

  std::map<std::string, double> wall_clock_ms;

  void finalize_ratios() {
    const double cross = static_cast<double>(r_size) * static_cast<double>(s_size);
    pairs_computed = rs_pairs + pivot_pairs;
    selectivity = cross > 0 ? static_cast<double>(pairs_computed) / cross : 0.0;
    avg_replication_alpha = s_size > 0 ? static_cast<double>(shuffle_records_S) / static_cast<double>(s_size) : 0.0;
  }
};

}  // namespace pgbj
