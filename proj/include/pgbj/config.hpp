#pragma once

#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>

#include "pgbj/grouping.hpp"
#include "pgbj/metric.hpp"
#include "pgbj/pivots.hpp"

namespace pgbj {

enum class EngineKind { PGBJ, BLOCK_BASELINE, ORACLE };

inline std::string_view to_string(EngineKind e) {
  switch (e) {
    case EngineKind::PGBJ: return "PGBJ";
    case EngineKind::BLOCK_BASELINE: return "BLOCK_BASELINE";
    case EngineKind::ORACLE: return "ORACLE";
  }
  return "?";
}

inline EngineKind parse_engine(std::string_view s) {
  if (s == "PGBJ" || s == "pgbj") return EngineKind::PGBJ;
  if (s == "BLOCK_BASELINE" || s == "block_baseline" || s == "block") return EngineKind::BLOCK_BASELINE;
  if (s == "ORACLE" || s == "oracle") return EngineKind::ORACLE;
  throw Error("unknown engine '" + std::string(s) + "'");
}

struct RunConfig {
  std::size_t k = 10;
  MetricKind metric = MetricKind::L2;
  SelectionConfig pivots;
  std::size_t num_groups = 1;
  GroupingStrategy grouping_strategy = GroupingStrategy::GEOMETRIC;
  EngineKind engine = EngineKind::PGBJ;
  std::size_t worker_count = 1;
  std::uint64_t seed = 0;
  // Added to every theta before it is used for routing or pruning.
  double theta_slack = 0.0;
  // When set, job-1 artifacts are written here and job 2 reloads them.
  std::string spill_dir;

  std::string r_path;
  std::string s_path;
  std::string result_path;
  std::string metrics_path;

  void validate() const {
    if (k == 0) throw Error("k must be positive");
    if (num_groups == 0) throw Error("num_groups must be positive");
    if (worker_count == 0) throw Error("worker_count must be positive");
    if (pivots.num_pivots == 0) throw Error("num_pivots must be positive");
    if (pivots.num_trials == 0) throw Error("num_trials must be positive");
    if (pivots.max_iterations == 0) throw Error("max_iterations must be positive");
    if (theta_slack < 0.0) throw Error("theta_slack must be non-negative");
  }

  /// Short strategy label: R/F/K pivots + GE/GR grouping (e.g. RGE).
  std::string strategy_label() const {
    std::string s(1, to_string(pivots.strategy).front());
    if (grouping_strategy == GroupingStrategy::GEOMETRIC) s += "GE";
    else if (grouping_strategy == GroupingStrategy::GREEDY) s += "GR";
    else s += "NG";
    return s;
  }

  std::string describe() const {
    std::ostringstream os;
    os << "engine=" << to_string(engine) << " k=" << k << " metric=" << to_string(metric)
       << " pivot_strategy=" << to_string(pivots.strategy) << " num_pivots=" << pivots.num_pivots
       << " num_trials=" << pivots.num_trials << " sample_size=" << pivots.sample_size
       << " max_iterations=" << pivots.max_iterations << " num_groups=" << num_groups
       << " grouping=" << to_string(grouping_strategy) << " worker_count=" << worker_count
       << " seed=" << seed << " theta_slack=" << theta_slack;
    if (!spill_dir.empty()) os << " spill_dir=" << spill_dir;
    return os.str();
  }
};

}  // namespace pgbj
