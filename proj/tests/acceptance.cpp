// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <unistd.h>
#include <unordered_map>
#include <vector>

#include "pgbj/pgbj.hpp"

namespace {

using namespace pgbj;

// Tolerances.
constexpr std::size_t kMinInstances = 50;
constexpr std::size_t kInstances = 60;
constexpr double kDistRelTol = 1e-9;
constexpr double kMaxClusteredSelectivity = 0.20;
constexpr double kMaxReplicationGrowth = 2.0;
constexpr double kMaxGroupRatio = 1.5;
constexpr std::size_t kExpandSlice = 1000;
constexpr std::size_t kExpandFactor = 5;

// Large-instance shapes.
constexpr std::size_t kLargeSize = 20000;
constexpr std::size_t kLargeDim = 10;
constexpr std::size_t kLargeClusters = 20;
constexpr std::size_t kLargePivots = 200;
constexpr std::size_t kLargeGroups = 9;

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("%s  %2d  %-28s %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  failures += !pass;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

bool close_rel(double a, double b) {
  if (a == b) return true;
  return std::abs(a - b) <= kDistRelTol * std::max(std::abs(a), std::abs(b));
}

// Number of (row, rank) slots where ids differ or distances are out of tolerance.
std::size_t mismatches(const JoinResult& got, const JoinResult& want) {
  if (got.rows.size() != want.rows.size()) return std::max(got.rows.size(), want.rows.size());
  std::size_t bad = 0;
  for (std::size_t x = 0; x < want.rows.size(); ++x) {
    const auto& g = got.rows[x];
    const auto& w = want.rows[x];
    if (g.r_id != w.r_id || g.neighbors.size() != w.neighbors.size()) {
      bad += std::max<std::size_t>(1, w.neighbors.size());
      continue;
    }
    for (std::size_t y = 0; y < w.neighbors.size(); ++y) {
      bad += g.neighbors[y].id != w.neighbors[y].id || !close_rel(g.neighbors[y].dist, w.neighbors[y].dist);
    }
  }
  return bad;
}

struct Instance {
  std::uint64_t seed = 0;
  std::size_t size = 0;
  bool self_join = false;
  bool clustered = false;
  std::size_t dim = 0;
  std::size_t k = 0;
  MetricKind metric = MetricKind::L2;
  PivotStrategy strategy = PivotStrategy::RANDOM;
  GroupingStrategy grouping = GroupingStrategy::GEOMETRIC;
  std::size_t groups = 1;
  std::size_t pivots = 8;

  std::string label() const {
    return "seed=" + std::to_string(seed) + " size=" + std::to_string(size) + (self_join ? " self" : " disjoint") +
           " n=" + std::to_string(dim) + " k=" + std::to_string(k) + " " + std::string(to_string(metric)) + " " +
           std::string(to_string(strategy)) + " " + std::string(to_string(grouping)) +
           " N=" + std::to_string(groups) + " m=" + std::to_string(pivots);
  }
};

template <class T, std::size_t M>
T pick(std::mt19937_64& rng, const T (&values)[M]) {
  return values[std::uniform_int_distribution<std::size_t>(0, M - 1)(rng)];
}

std::vector<Instance> suite() {
  const std::size_t sizes[] = {200, 2000};
  const std::size_t dims[] = {2, 4, 10};
  const std::size_t ks[] = {1, 5, 10, 50};
  const MetricKind metrics[] = {MetricKind::L1, MetricKind::L2, MetricKind::LINF};
  const PivotStrategy strategies[] = {PivotStrategy::RANDOM, PivotStrategy::FARTHEST, PivotStrategy::KMEANS};
  const GroupingStrategy groupings[] = {GroupingStrategy::GEOMETRIC, GroupingStrategy::GREEDY};
  const std::size_t group_counts[] = {1, 4, 9};
  const std::size_t pivot_counts[] = {8, 32, 64};
  std::vector<Instance> out;
  for (std::uint64_t i = 0; i < kInstances; ++i) {
    std::mt19937_64 rng(0x5eed0000 + i);
    Instance in;
    in.seed = i;
    in.size = pick(rng, sizes);
    in.self_join = rng() % 2 == 0;
    in.clustered = rng() % 2 == 0;
    in.dim = pick(rng, dims);
    in.k = pick(rng, ks);
    in.metric = pick(rng, metrics);
    in.strategy = pick(rng, strategies);
    in.grouping = pick(rng, groupings);
    in.pivots = pick(rng, pivot_counts);
    // Eight partitions cannot be spread over nine groups.
    do {
      in.groups = pick(rng, group_counts);
    } while (in.groups > in.pivots);
    out.push_back(in);
  }
  return out;
}

struct Data {
  Dataset R, S;
};

Data data_for(const Instance& in) {
  const SyntheticKind kind = in.clustered ? SyntheticKind::GAUSSIAN_MIXTURE : SyntheticKind::UNIFORM;
  Data d;
  d.R = generate_synthetic(kind, in.dim, in.size, 12, 2 * in.seed + 1, "R");
  d.S = in.self_join ? d.R : generate_synthetic(kind, in.dim, in.size, 12, 2 * in.seed + 2, "S");
  return d;
}

RunConfig config_for(const Instance& in) {
  RunConfig cfg;
  cfg.k = in.k;
  cfg.metric = in.metric;
  cfg.pivots.strategy = in.strategy;
  cfg.pivots.num_pivots = in.pivots;
  cfg.grouping_strategy = in.grouping;
  cfg.num_groups = in.groups;
  cfg.seed = in.seed;
  return cfg;
}

// Summary-table invariants; returns the number of violated checks.
std::size_t summary_violations(const PartitionOutput& job1, std::size_t r_size, std::size_t s_size, std::size_t k) {
  const auto& t = job1.tables;
  std::size_t bad = 0, r_total = 0, s_total = 0;
  for (std::size_t i = 0; i < t.num_partitions(); ++i) {
    r_total += t.t_r[i].count;
    s_total += t.t_s[i].count;
    for (const auto* st : {&t.t_r[i], &t.t_s[i]}) bad += st->count > 0 && !(st->lower <= st->upper);
    const auto& kd = t.t_s[i].knn_dists;
    bad += kd.size() != std::min(k, t.t_s[i].count);
    bad += !std::is_sorted(kd.begin(), kd.end());
  }
  bad += r_total != r_size;
  bad += s_total != s_size;
  return bad;
}

std::string read_bytes(const std::filesystem::path& p) { return text::read_file(p.string()); }

struct SuiteTotals {
  std::size_t instances = 0;
  std::size_t errors = 0;
  std::size_t mismatched = 0;
  std::size_t theta_violations = 0;
  std::size_t routing_misses = 0;
  std::size_t replication_mismatches = 0;
  std::size_t invariant_violations = 0;
  std::size_t merge_mismatches = 0;
  std::map<std::string, std::set<std::string>> coverage;
};

void run_suite(SuiteTotals& tot) {
  for (const Instance& in : suite()) {
    ++tot.instances;
    auto& cov = tot.coverage;
    cov["size"].insert(std::to_string(in.size));
    cov["join"].insert(in.self_join ? "self" : "disjoint");
    cov["n"].insert(std::to_string(in.dim));
    cov["k"].insert(std::to_string(in.k));
    cov["metric"].insert(std::string(to_string(in.metric)));
    cov["pivot strategy"].insert(std::string(to_string(in.strategy)));
    cov["grouping"].insert(std::string(to_string(in.grouping)));
    cov["N"].insert(std::to_string(in.groups));
    cov["num_pivots"].insert(std::to_string(in.pivots));
    try {
      const Data d = data_for(in);
      PgbjOptions opts;
      opts.capture_buckets = true;
      const PgbjRun run = run_pgbj(d.R, d.S, config_for(in), opts);
      const JoinResult truth = brute_force_knn_join(d.R, d.S, in.k, in.metric);

      const std::size_t bad = mismatches(run.result, truth);
      if (bad) std::printf("  mismatch: %s (%zu slots)\n", in.label().c_str(), bad);
      tot.mismatched += bad > 0;

      std::unordered_map<PointId, double> kth;
      for (const auto& row : truth.rows) kth[row.r_id] = row.neighbors.back().dist;
      std::unordered_map<PointId, std::size_t> part_of;
      for (const auto& rec : run.job1.records) {
        if (rec.source != Source::R) continue;
        part_of[rec.object.id] = rec.partition_id;
        tot.theta_violations += !(kth.at(rec.object.id) <= run.plan.thetas[rec.partition_id]);
      }

      for (const auto& row : truth.rows) {
        const auto& bucket = run.bucket_s_ids.at(run.plan.grouping.group_of.at(part_of.at(row.r_id)));
        for (const auto& n : row.neighbors) tot.routing_misses += !std::binary_search(bucket.begin(), bucket.end(), n.id);
      }

      tot.replication_mismatches += run.predicted_replication != run.metrics.shuffle_records_S;

      tot.invariant_violations += summary_violations(run.job1, d.R.size(), d.S.size(), in.k);
      const PartitionOutput seq = partition_all(d.R, d.S, run.pivots, in.k, 1, 1);
      for (std::size_t splits : {3, 16}) {
        const PartitionOutput par = partition_all(d.R, d.S, run.pivots, in.k, 4, splits);
        tot.merge_mismatches += !(par.tables == seq.tables) || !(par.records == seq.records);
      }
      tot.merge_mismatches += !(seq.tables == run.job1.tables);
    } catch (const std::exception& e) {
      ++tot.errors;
      std::printf("  error: %s: %s\n", in.label().c_str(), e.what());
    }
  }
}

Dataset clustered_large() {
  return generate_synthetic(SyntheticKind::GAUSSIAN_MIXTURE, kLargeDim, kLargeSize, kLargeClusters, 20, "clustered");
}

RunConfig large_config(std::size_t k) {
  RunConfig cfg;
  cfg.k = k;
  cfg.pivots.strategy = PivotStrategy::RANDOM;
  cfg.pivots.num_pivots = kLargePivots;
  cfg.grouping_strategy = GroupingStrategy::GEOMETRIC;
  cfg.num_groups = kLargeGroups;
  cfg.seed = 5;
  return cfg;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main() {
  log_enabled() = false;
  const auto start = std::chrono::steady_clock::now();
  const auto tmp = std::filesystem::temp_directory_path() / ("pgbj_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(tmp);

  // Criteria 1-4 and 8 share the randomized instance suite.
  SuiteTotals tot;
  run_suite(tot);
  std::string missing;
  const std::map<std::string, std::size_t> grid = {{"size", 2}, {"join", 2}, {"n", 3},  {"k", 4},          {"metric", 3},
                                                   {"pivot strategy", 3}, {"grouping", 2}, {"N", 3}, {"num_pivots", 3}};
  for (const auto& [axis, want] : grid) {
    if (tot.coverage[axis].size() != want) missing += " " + axis;
  }
  const std::string suite_info = std::to_string(tot.instances) + " instances, " + std::to_string(tot.errors) + " errors";
  report(1, "oracle exactness",
         tot.instances >= kMinInstances && tot.errors == 0 && tot.mismatched == 0 && missing.empty(),
         suite_info + ", " + std::to_string(tot.mismatched) + " mismatched results, rel tol " + fmt("%g", kDistRelTol) +
             (missing.empty() ? ", every grid value covered" : ", uncovered axes:" + missing) + " (" +
             fmt("%.1f", seconds_since(start)) + " s)");
  report(2, "theta soundness", tot.errors == 0 && tot.theta_violations == 0,
         std::to_string(tot.theta_violations) + " objects with oracle k-th distance above theta");
  report(3, "routing completeness", tot.errors == 0 && tot.routing_misses == 0,
         std::to_string(tot.routing_misses) + " oracle neighbors missing from the reduce bucket");
  report(4, "cost-model exactness", tot.errors == 0 && tot.replication_mismatches == 0,
         std::to_string(tot.replication_mismatches) + " instances where predicted replication != shuffled S records");

  // Criteria 5, 6 and 9 share the large clustered self-join.
  const Dataset C = clustered_large();
  auto t0 = std::chrono::steady_clock::now();
  const PgbjRun pg10 = run_pgbj(C, C, large_config(10));
  const double pg10_s = seconds_since(t0);
  RunConfig base_cfg = large_config(10);
  base_cfg.engine = EngineKind::BLOCK_BASELINE;
  t0 = std::chrono::steady_clock::now();
  const EngineRun base10 = run_block_baseline(C, C, base_cfg);
  const double base10_s = seconds_since(t0);
  const double sel = pg10.metrics.selectivity;
  const double base_sel = base10.metrics.selectivity;
  const bool agree = pg10.result == base10.result;
  report(5, "pruning effectiveness", sel <= kMaxClusteredSelectivity && sel < base_sel,
         "PGBJ selectivity " + fmt("%.4f", sel) + " (limit " + fmt("%.2f", kMaxClusteredSelectivity) +
             "), baseline " + fmt("%.4f", base_sel) + ", results agree: " + (agree ? "yes" : "no") + " (" +
             fmt("%.1f", pg10_s) + " s vs " + fmt("%.1f", base10_s) + " s)");

  const PgbjRun pg50 = run_pgbj(C, C, large_config(50));
  base_cfg.k = 50;
  const EngineRun base50 = run_block_baseline(C, C, base_cfg);
  const double rp10 = static_cast<double>(pg10.metrics.shuffle_records_S);
  const double rp50 = static_cast<double>(pg50.metrics.shuffle_records_S);
  report(6, "replication vs k", rp50 <= kMaxReplicationGrowth * rp10,
         "PGBJ RP(S) k=10 " + std::to_string(pg10.metrics.shuffle_records_S) + ", k=50 " +
             std::to_string(pg50.metrics.shuffle_records_S) + " (ratio " + fmt("%.3f", rp50 / rp10) + ", limit " +
             fmt("%.1f", kMaxReplicationGrowth) + "); baseline S shuffle k=10 " +
             std::to_string(base10.metrics.shuffle_records_S) + ", k=50 " +
             std::to_string(base50.metrics.shuffle_records_S) + "; baseline merge records k=10 " +
             std::to_string(base10.metrics.merge_records) + ", k=50 " + std::to_string(base50.metrics.merge_records));

  {
    const Dataset U = generate_synthetic(SyntheticKind::UNIFORM, kLargeDim, kLargeSize, 0, 7, "uniform");
    RunConfig cfg = large_config(10);
    SelectionConfig sel_cfg = cfg.pivots;
    sel_cfg.seed = SeedTree(cfg.seed).split("pivots").seed();
    const PivotSet pv = select_pivots(U, sel_cfg, cfg.metric);
    const PartitionOutput job1 = partition_all(U, U, pv, cfg.k);
    const Plan plan = make_plan(pv, job1.tables, cfg);
    const auto [lo, hi] = std::minmax_element(plan.grouping.r_count.begin(), plan.grouping.r_count.end());
    const double ratio = *lo > 0 ? static_cast<double>(*hi) / static_cast<double>(*lo) : INFINITY;
    const SizeStats st = SizeStats::of(plan.grouping.r_count);
    report(7, "load balance", ratio <= kMaxGroupRatio,
           "group R counts min " + std::to_string(*lo) + " max " + std::to_string(*hi) + " (ratio " +
               fmt("%.3f", ratio) + ", limit " + fmt("%.1f", kMaxGroupRatio) + "), avg " + fmt("%.1f", st.avg) +
               " dev " + fmt("%.1f", st.dev));
  }

  report(8, "summary invariants", tot.errors == 0 && tot.invariant_violations == 0 && tot.merge_mismatches == 0,
         std::to_string(tot.invariant_violations) + " table violations, " + std::to_string(tot.merge_mismatches) +
             " parallel merges differing from sequential, over " + std::to_string(tot.instances) + " instances");

  {
    std::size_t differing = 0, runs = 0;
    auto compare = [&](const Dataset& R, const Dataset& S, RunConfig cfg, const PgbjRun* one_worker) {
      cfg.worker_count = 1;
      const PgbjRun one = one_worker ? PgbjRun{} : run_pgbj(R, S, cfg);
      const PgbjRun& a = one_worker ? *one_worker : one;
      cfg.worker_count = 8;
      const PgbjRun b = run_pgbj(R, S, cfg);
      write_result(a.result, (tmp / "w1.csv").string());
      write_result(b.result, (tmp / "w8.csv").string());
      differing += read_bytes(tmp / "w1.csv") != read_bytes(tmp / "w8.csv") ||
                   a.metrics.pairs_computed != b.metrics.pairs_computed;
      ++runs;
    };
    compare(C, C, large_config(10), &pg10);
    const auto instances = suite();
    for (std::size_t i = 0; i < instances.size(); i += 6) {
      const Data d = data_for(instances[i]);
      compare(d.R, d.S, config_for(instances[i]), nullptr);
    }
    report(9, "determinism under threads", differing == 0,
           std::to_string(differing) + " of " + std::to_string(runs) +
               " runs differ between 1 and 8 workers (result bytes or pairs_computed)");
  }

  {
    // Coordinates rounded to two decimals so that values repeat.
    Dataset base = generate_synthetic(SyntheticKind::GAUSSIAN_MIXTURE, 4, 3 * kExpandSlice, 6, 11, "base");
    for (auto& p : base.points) {
      for (auto& v : p.coords) v = std::round(v * 100.0) / 100.0;
    }
    Dataset slice;
    slice.name = "slice";
    slice.points.assign(base.points.begin() + kExpandSlice, base.points.begin() + 2 * kExpandSlice);
    const Dataset out = expand_dataset(slice, kExpandFactor);

    bool verbatim = out.size() >= slice.size();
    for (std::size_t i = 0; verbatim && i < slice.size(); ++i) verbatim = out.points[i] == slice.points[i];

    // Replay: independent frequency order per dimension, then the substitution.
    std::size_t audit_bad = 0;
    const std::size_t n = slice.dim();
    std::vector<std::vector<double>> order(n);
    for (std::size_t d = 0; d < n; ++d) {
      std::unordered_map<double, std::size_t> freq;
      for (const auto& p : slice.points) ++freq[p.coords[d]];
      std::vector<std::pair<double, std::size_t>> vals(freq.begin(), freq.end());
      std::sort(vals.begin(), vals.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second < b.second : a.first < b.first;
      });
      for (const auto& v : vals) order[d].push_back(v.first);
      audit_bad += order[d] != expansion_value_order(slice, d);
    }
    std::vector<const DataPoint*> by_id;
    for (const auto& p : slice.points) by_id.push_back(&p);
    std::sort(by_id.begin(), by_id.end(), [](const DataPoint* a, const DataPoint* b) { return a->id < b->id; });
    if (out.size() == kExpandFactor * slice.size()) {
      for (std::size_t c = 1; c < kExpandFactor; ++c) {
        for (std::size_t x = 0; x < by_id.size(); ++x) {
          const DataPoint& q = out.points[c * slice.size() + x];
          for (std::size_t d = 0; d < n; ++d) {
            const auto at = std::find(order[d].begin(), order[d].end(), by_id[x]->coords[d]) - order[d].begin();
            const std::size_t want = std::min<std::size_t>(at + c, order[d].size() - 1);
            audit_bad += q.coords[d] != order[d][want];
          }
        }
      }
    }
    std::set<PointId> ids;
    for (const auto& p : out.points) ids.insert(p.id);
    const bool ok = out.size() == kExpandFactor * kExpandSlice && verbatim && audit_bad == 0 && ids.size() == out.size();
    report(10, "expansion generator", ok,
           std::to_string(out.size()) + " points from " + std::to_string(slice.size()) + ", originals verbatim: " +
               (verbatim ? "yes" : "no") + ", " + std::to_string(audit_bad) + " audit mismatches, " +
               std::to_string(ids.size()) + " distinct ids");
  }

  std::filesystem::remove_all(tmp);
  std::printf("acceptance: %d failing criteria, %.1f s total\n", failures, seconds_since(start));
  return failures == 0 ? 0 : 1;
}
