#pragma once

#include <algorithm>
#include <cstddef>
#include <iterator>
#include <limits>
#include <string_view>
#include <utility>
#include <vector>

#include "pgbj/metric.hpp"
#include "pgbj/parallel.hpp"
#include "pgbj/pivots.hpp"

namespace pgbj {

enum class Source : unsigned char { R = 0, S = 1 };

inline std::string_view to_string(Source s) { return s == Source::R ? "R" : "S"; }

/// Output of the partitioning job: one object with its Voronoi cell and the
/// distance to that cell's pivot.
struct AssignmentRecord {
  DataPoint object;
  Source source = Source::R;
  std::size_t partition_id = 0;
  double dist_to_pivot = 0.0;

  friend bool operator==(const AssignmentRecord&, const AssignmentRecord&) = default;
};

struct PartitionStats {
  std::size_t count = 0;
  double lower = std::numeric_limits<double>::infinity();
  double upper = -std::numeric_limits<double>::infinity();
  // S side only: ascending, the min(k, count) smallest pivot distances.
  std::vector<double> knn_dists;

  bool empty() const { return count == 0; }
  friend bool operator==(const PartitionStats&, const PartitionStats&) = default;
};

/// Per-partition statistics for R (t_r) and S (t_s), indexed by pivot.
/// Partial tables built over disjoint input splits merge associatively and
/// commutatively into the table a sequential pass would produce.
struct SummaryTables {
  std::size_t k = 0;
  std::vector<PartitionStats> t_r;
  std::vector<PartitionStats> t_s;

  SummaryTables() = default;
  SummaryTables(std::size_t num_partitions, std::size_t k_)
      : k(k_), t_r(num_partitions), t_s(num_partitions) {}

  std::size_t num_partitions() const { return t_r.size(); }

  void add(Source src, std::size_t partition, double dist) {
    PartitionStats& st = (src == Source::R ? t_r : t_s)[partition];
    ++st.count;
    st.lower = std::min(st.lower, dist);
    st.upper = std::max(st.upper, dist);
    if (src == Source::S) insert_bounded(st.knn_dists, dist);
  }

  void merge(const SummaryTables& other) {
    if (other.num_partitions() != num_partitions() || other.k != k) {
      throw Error("cannot merge summary tables of different shapes");
    }
    for (std::size_t i = 0; i < num_partitions(); ++i) {
      merge_stats(t_r[i], other.t_r[i], false);
      merge_stats(t_s[i], other.t_s[i], true);
    }
  }

  friend bool operator==(const SummaryTables&, const SummaryTables&) = default;

 private:
  void insert_bounded(std::vector<double>& list, double v) const {
    if (k == 0) return;
    if (list.size() == k && v >= list.back()) return;
    list.insert(std::upper_bound(list.begin(), list.end(), v), v);
    if (list.size() > k) list.pop_back();
  }

  void merge_stats(PartitionStats& into, const PartitionStats& from, bool keep_knn) const {
    into.count += from.count;
    into.lower = std::min(into.lower, from.lower);
    into.upper = std::max(into.upper, from.upper);
    if (!keep_knn) return;
    std::vector<double> merged;
    merged.reserve(into.knn_dists.size() + from.knn_dists.size());
    std::merge(into.knn_dists.begin(), into.knn_dists.end(), from.knn_dists.begin(),
               from.knn_dists.end(), std::back_inserter(merged));
    if (merged.size() > k) merged.resize(k);
    into.knn_dists = std::move(merged);
  }
};

struct Assignment {
  std::size_t partition_id = 0;
  double dist_to_pivot = 0.0;
};

/// Nearest pivot, ties to the lowest pivot index.
inline Assignment assign(const DataPoint& o, const PivotSet& pv) {
  if (pv.size() == 0) throw Error("assign: empty pivot set");
  Assignment best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double d = distance(o, pv[i], pv.metric);
    if (d < best.dist_to_pivot) best = {i, d};
  }
  return best;
}

struct PartitionOutput {
  std::vector<AssignmentRecord> records;  // R first, then S; each by ascending id
  SummaryTables tables;
};

/// Canonical record order: source, then id.
inline void canonicalize(std::vector<AssignmentRecord>& records) {
  std::sort(records.begin(), records.end(), [](const AssignmentRecord& a, const AssignmentRecord& b) {
    if (a.source != b.source) return a.source < b.source;
    return a.object.id < b.object.id;
  });
}

/// The partitioning job. Objects of R u S are mapped in `splits` disjoint
/// slices (processed by `workers` threads); each slice keeps a private
/// partial summary and the partials are merged afterwards.
inline PartitionOutput partition_all(const Dataset& R, const Dataset& S, const PivotSet& pv,
                                     std::size_t k, std::size_t workers = 1,
                                     std::size_t splits = 0) {
  if (!R.empty() && R.dim() != pv.dim()) throw Error("partition_all: R dimensionality differs from pivots");
  if (!S.empty() && S.dim() != pv.dim()) throw Error("partition_all: S dimensionality differs from pivots");
  const std::size_t total = R.size() + S.size();
  if (splits == 0) splits = std::max<std::size_t>(1, workers);
  splits = std::max<std::size_t>(1, std::min(splits, std::max<std::size_t>(total, 1)));

  std::vector<std::vector<AssignmentRecord>> part_records(splits);
  std::vector<SummaryTables> partials(splits, SummaryTables(pv.size(), k));
  parallel_for(splits, workers, [&](std::size_t c) {
    const auto [begin, end] = chunk_bounds(total, splits, c);
    auto& out = part_records[c];
    out.reserve(end - begin);
    for (std::size_t g = begin; g < end; ++g) {
      const bool from_r = g < R.size();
      const DataPoint& o = from_r ? R.points[g] : S.points[g - R.size()];
      const Source src = from_r ? Source::R : Source::S;
      const Assignment a = assign(o, pv);
      partials[c].add(src, a.partition_id, a.dist_to_pivot);
      out.push_back({o, src, a.partition_id, a.dist_to_pivot});
    }
  });

  PartitionOutput result;
  result.tables = SummaryTables(pv.size(), k);
  result.records.reserve(total);
  for (std::size_t c = 0; c < splits; ++c) {
    result.tables.merge(partials[c]);
    for (auto& rec : part_records[c]) result.records.push_back(std::move(rec));
  }
  canonicalize(result.records);
  return result;
}

}  // namespace pgbj
