#pragma once

#include <cstddef>
#include <vector>

#include "pgbj/bounds.hpp"
#include "pgbj/config.hpp"
#include "pgbj/grouping.hpp"
#include "pgbj/partitioner.hpp"
#include "pgbj/pivots.hpp"

namespace pgbj {

/// Everything job 2 needs beyond the job-1 records: kNN bounds, replication
/// thresholds and the reducer grouping.
struct Plan {
  std::size_t k = 0;
  double theta_slack = 0.0;
  PivotDistanceCache cache;
  ThetaTable thetas;
  LBTable lb;
  Grouping grouping;
  GroupLBTable glb;
};

inline Grouping make_grouping(const PivotSet& pv, const SummaryTables& tables, const PivotDistanceCache& cache,
                              const LBTable& lb, GroupingStrategy strategy, std::size_t num_groups) {
  switch (strategy) {
    case GroupingStrategy::GEOMETRIC: return geometric_grouping(pv, tables, cache, num_groups);
    case GroupingStrategy::GREEDY: return greedy_grouping(pv, tables, cache, lb, num_groups);
    case GroupingStrategy::NONE: return singleton_grouping(tables);
  }
  throw Error("unknown grouping strategy");
}

inline Plan make_plan(const PivotSet& pv, const SummaryTables& tables, const RunConfig& cfg) {
  Plan plan;
  plan.k = cfg.k;
  plan.theta_slack = cfg.theta_slack;
  plan.cache = PivotDistanceCache(pv);
  plan.thetas = compute_thetas(tables, plan.cache, cfg.k);
  plan.lb = build_lb_table(tables, plan.thetas, plan.cache, cfg.theta_slack);
  plan.grouping = make_grouping(pv, tables, plan.cache, plan.lb, cfg.grouping_strategy, cfg.num_groups);
  plan.glb = group_lb(plan.lb, plan.grouping);
  return plan;
}

/// Rebuilds group_of / r_count from persisted member lists.
inline Grouping grouping_from_members(std::vector<std::vector<std::size_t>> members, const SummaryTables& tables) {
  Grouping g;
  g.num_groups = members.size();
  g.group_of.assign(tables.num_partitions(), kNoGroup);
  g.r_count.assign(members.size(), 0);
  g.members = std::move(members);
  for (std::size_t grp = 0; grp < g.num_groups; ++grp) {
    for (std::size_t p : g.members[grp]) {
      if (p >= tables.num_partitions()) throw Error("grouping references unknown partition " + std::to_string(p));
      if (g.group_of[p] != kNoGroup) throw Error("partition " + std::to_string(p) + " appears in two groups");
      g.group_of[p] = grp;
      g.r_count[grp] += tables.t_r[p].count;
    }
  }
  return g;
}

}  // namespace pgbj
