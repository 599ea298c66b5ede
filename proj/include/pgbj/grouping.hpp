#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "pgbj/bounds.hpp"
#include "pgbj/partitioner.hpp"
#include "pgbj/pivots.hpp"

namespace pgbj {

enum class GroupingStrategy { GEOMETRIC, GREEDY, NONE };

inline std::string_view to_string(GroupingStrategy g) {
  switch (g) {
    case GroupingStrategy::GEOMETRIC: return "GEOMETRIC";
    case GroupingStrategy::GREEDY: return "GREEDY";
    case GroupingStrategy::NONE: return "NONE";
  }
  return "?";
}

inline GroupingStrategy parse_grouping_strategy(std::string_view s) {
  if (s == "GEOMETRIC" || s == "geometric") return GroupingStrategy::GEOMETRIC;
  if (s == "GREEDY" || s == "greedy") return GroupingStrategy::GREEDY;
  if (s == "NONE" || s == "none") return GroupingStrategy::NONE;
  throw Error("unknown grouping strategy '" + std::string(s) + "'");
}

inline constexpr std::size_t kNoGroup = std::numeric_limits<std::size_t>::max();

/// Assignment of non-empty R-partitions to N reducer groups. Empty
/// R-partitions carry kNoGroup.
struct Grouping {
  std::size_t num_groups = 0;
  std::vector<std::size_t> group_of;              // per partition
  std::vector<std::vector<std::size_t>> members;  // per group, in insertion order
  std::vector<std::size_t> r_count;               // R-objects per group

  friend bool operator==(const Grouping&, const Grouping&) = default;
};

/// One step of the balancing loop, recorded for replay checks.
struct GroupingStep {
  std::size_t group = 0;
  std::size_t partition = 0;
  std::vector<std::size_t> counts_before;
};

namespace detail {

inline std::vector<std::size_t> nonempty_r_partitions(const SummaryTables& tables) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < tables.num_partitions(); ++i) {
    if (!tables.t_r[i].empty()) out.push_back(i);
  }
  return out;
}

inline void add_member(Grouping& g, std::size_t group, std::size_t partition,
                       const SummaryTables& tables) {
  g.group_of[partition] = group;
  g.members[group].push_back(partition);
  g.r_count[group] += tables.t_r[partition].count;
}

// Seeds one group per pivot: first the pivot farthest (in summed distance)
// from all candidates, then repeatedly the candidate farthest from the seeds.
// Returns the candidates left unassigned.
inline std::vector<std::size_t> seed_groups(Grouping& g, const SummaryTables& tables,
                                            const PivotDistanceCache& cache, std::size_t N) {
  std::vector<std::size_t> remaining = nonempty_r_partitions(tables);
  if (N == 0) throw Error("number of groups must be positive");
  if (N > remaining.size()) {
    throw Error("number of groups (" + std::to_string(N) + ") exceeds the number of non-empty R-partitions (" +
                std::to_string(remaining.size()) + ")");
  }
  g.num_groups = N;
  g.group_of.assign(tables.num_partitions(), kNoGroup);
  g.members.assign(N, {});
  g.r_count.assign(N, 0);

  auto take = [&](std::size_t pos) {
    const std::size_t p = remaining[pos];
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pos));
    return p;
  };

  std::size_t first = 0;
  double best = -1.0;
  for (std::size_t a = 0; a < remaining.size(); ++a) {
    double total = 0.0;
    for (std::size_t b : remaining) total += cache(remaining[a], b);
    if (total > best) {
      best = total;
      first = a;
    }
  }
  std::vector<std::size_t> seeds{take(first)};
  add_member(g, 0, seeds.back(), tables);

  for (std::size_t grp = 1; grp < N; ++grp) {
    std::size_t pick = 0;
    double pick_sum = -1.0;
    for (std::size_t a = 0; a < remaining.size(); ++a) {
      double total = 0.0;
      for (std::size_t s : seeds) total += cache(remaining[a], s);
      if (total > pick_sum) {
        pick_sum = total;
        pick = a;
      }
    }
    seeds.push_back(take(pick));
    add_member(g, grp, seeds.back(), tables);
  }
  return remaining;
}

inline std::size_t smallest_group(const Grouping& g) {
  return static_cast<std::size_t>(std::min_element(g.r_count.begin(), g.r_count.end()) - g.r_count.begin());
}

}  // namespace detail

/// Geometric grouping: farthest-apart seeds, then the currently lightest
/// group (in R-objects) absorbs the unassigned partition whose pivot is
/// nearest, in summed distance, to the group's pivots.
inline Grouping geometric_grouping(const PivotSet& pv, const SummaryTables& tables,
                                   const PivotDistanceCache& cache, std::size_t N,
                                   std::vector<GroupingStep>* trace = nullptr) {
  if (pv.size() != tables.num_partitions()) throw Error("geometric_grouping: pivot/table size mismatch");
  Grouping g;
  auto remaining = detail::seed_groups(g, tables, cache, N);
  while (!remaining.empty()) {
    const std::size_t grp = detail::smallest_group(g);
    std::size_t pick = 0;
    double pick_sum = kInf;
    for (std::size_t a = 0; a < remaining.size(); ++a) {
      double total = 0.0;
      for (std::size_t member : g.members[grp]) total += cache(remaining[a], member);
      if (total < pick_sum) {
        pick_sum = total;
        pick = a;
      }
    }
    if (trace) trace->push_back({grp, remaining[pick], g.r_count});
    detail::add_member(g, grp, remaining[pick], tables);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return g;
}

/// S-objects newly counted as replicated to a group whose current
/// per-S-partition thresholds are `group_lb`, if partition `candidate`
/// joins it. Partition granularity: P_j^S counts in full once
/// LB(P_j^S, G) <= U(P_j^S).
inline std::size_t greedy_increment(const std::vector<double>& group_lb, std::size_t candidate,
                                    const SummaryTables& tables, const LBTable& lb) {
  std::size_t added = 0;
  for (std::size_t j = 0; j < tables.num_partitions(); ++j) {
    const PartitionStats& s = tables.t_s[j];
    if (s.empty() || group_lb[j] <= s.upper) continue;
    if (std::min(group_lb[j], lb.at(j, candidate)) <= s.upper) added += s.count;
  }
  return added;
}

/// Greedy grouping: same seeding as geometric grouping; the lightest group
/// then absorbs the partition adding the fewest S-objects to its
/// partition-level replica set.
inline Grouping greedy_grouping(const PivotSet& pv, const SummaryTables& tables,
                                const PivotDistanceCache& cache, const LBTable& lb, std::size_t N,
                                std::vector<GroupingStep>* trace = nullptr) {
  if (pv.size() != tables.num_partitions()) throw Error("greedy_grouping: pivot/table size mismatch");
  const std::size_t m = tables.num_partitions();
  Grouping g;
  auto remaining = detail::seed_groups(g, tables, cache, N);

  // Current LB(P_j^S, G) per group.
  std::vector<std::vector<double>> current(N, std::vector<double>(m, kInf));
  for (std::size_t grp = 0; grp < N; ++grp) {
    for (std::size_t j = 0; j < m; ++j) current[grp][j] = lb.at(j, g.members[grp].front());
  }

  while (!remaining.empty()) {
    const std::size_t grp = detail::smallest_group(g);
    std::size_t pick = 0;
    std::size_t pick_cost = std::numeric_limits<std::size_t>::max();
    for (std::size_t a = 0; a < remaining.size(); ++a) {
      const std::size_t cost = greedy_increment(current[grp], remaining[a], tables, lb);
      if (cost < pick_cost) {
        pick_cost = cost;
        pick = a;
      }
    }
    const std::size_t p = remaining[pick];
    if (trace) trace->push_back({grp, p, g.r_count});
    detail::add_member(g, grp, p, tables);
    for (std::size_t j = 0; j < m; ++j) current[grp][j] = std::min(current[grp][j], lb.at(j, p));
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return g;
}

/// One group per non-empty R-partition, in partition order.
inline Grouping singleton_grouping(const SummaryTables& tables) {
  Grouping g;
  const auto parts = detail::nonempty_r_partitions(tables);
  g.num_groups = parts.size();
  g.group_of.assign(tables.num_partitions(), kNoGroup);
  g.members.assign(parts.size(), {});
  g.r_count.assign(parts.size(), 0);
  for (std::size_t grp = 0; grp < parts.size(); ++grp) detail::add_member(g, grp, parts[grp], tables);
  return g;
}

/// LB(P_j^S, G_i) = min over partitions l of G_i of lb[j][l].
struct GroupLBTable {
  std::size_t num_partitions = 0;
  std::size_t num_groups = 0;
  std::vector<double> glb;  // row-major [j * num_groups + i]

  double at(std::size_t j, std::size_t i) const { return glb[j * num_groups + i]; }
  friend bool operator==(const GroupLBTable&, const GroupLBTable&) = default;
};

inline GroupLBTable group_lb(const LBTable& lb, const Grouping& g) {
  GroupLBTable out{lb.m, g.num_groups, std::vector<double>(lb.m * g.num_groups, kInf)};
  for (std::size_t j = 0; j < lb.m; ++j) {
    for (std::size_t i = 0; i < g.num_groups; ++i) {
      double v = kInf;
      for (std::size_t l : g.members[i]) v = std::min(v, lb.at(j, l));
      out.glb[j * g.num_groups + i] = v;
    }
  }
  return out;
}

/// Total S replicas shipped to reducers: for every group i and S-object s of
/// partition j, s counts once if |s, p_j| >= LB(P_j^S, G_i).
inline std::uint64_t predicted_replication(const std::vector<AssignmentRecord>& records,
                                           const GroupLBTable& glb) {
  std::uint64_t total = 0;
  for (const auto& rec : records) {
    if (rec.source != Source::S) continue;
    for (std::size_t i = 0; i < glb.num_groups; ++i) {
      if (rec.dist_to_pivot >= glb.at(rec.partition_id, i)) ++total;
    }
  }
  return total;
}

/// Object-level replica set of a set of R-partitions: ids of S-objects s with
/// |s, p_j| >= min over the set of lb[j][l]. Ascending ids.
inline std::vector<PointId> replica_set(const std::vector<AssignmentRecord>& records, const LBTable& lb,
                                        const std::vector<std::size_t>& partitions) {
  std::vector<PointId> ids;
  for (const auto& rec : records) {
    if (rec.source != Source::S) continue;
    double threshold = kInf;
    for (std::size_t l : partitions) threshold = std::min(threshold, lb.at(rec.partition_id, l));
    if (rec.dist_to_pivot >= threshold) ids.push_back(rec.object.id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace pgbj
