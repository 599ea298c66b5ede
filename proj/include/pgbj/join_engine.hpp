#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "pgbj/artifacts.hpp"
#include "pgbj/bounds.hpp"
#include "pgbj/config.hpp"
#include "pgbj/grouping.hpp"
#include "pgbj/knn.hpp"
#include "pgbj/log.hpp"
#include "pgbj/oracle.hpp"
#include "pgbj/parallel.hpp"
#include "pgbj/partitioner.hpp"
#include "pgbj/pivots.hpp"
#include "pgbj/plan.hpp"
#include "pgbj/random.hpp"
#include "pgbj/run_metrics.hpp"

namespace pgbj {

/// Map output of the join job: a job-1 record keyed by reducer group.
struct RoutedRecord {
  std::size_t group_id = 0;
  const AssignmentRecord* record = nullptr;
};

/// R-records go to their partition's group. S-records go to every group i
/// whose threshold LB(P_j^S, G_i) does not exceed the record's pivot distance.
inline void route_into(const AssignmentRecord& rec, const Grouping& g, const GroupLBTable& glb,
                       std::vector<RoutedRecord>& out) {
  if (rec.source == Source::R) {
    const std::size_t grp = g.group_of.at(rec.partition_id);
    if (grp == kNoGroup) throw Error("R-record " + std::to_string(rec.object.id) + " belongs to an ungrouped partition");
    out.push_back({grp, &rec});
    return;
  }
  for (std::size_t i = 0; i < glb.num_groups; ++i) {
    if (glb.at(rec.partition_id, i) <= rec.dist_to_pivot) out.push_back({i, &rec});
  }
}

inline std::vector<RoutedRecord> route(const AssignmentRecord& rec, const Grouping& g, const GroupLBTable& glb) {
  std::vector<RoutedRecord> out;
  route_into(rec, g, glb, out);
  return out;
}

/// One reducer's input. Both sides ordered by (partition, id).
struct Bucket {
  std::vector<const AssignmentRecord*> r;
  std::vector<const AssignmentRecord*> s;

  std::size_t size() const { return r.size() + s.size(); }
};

struct ShuffleOutput {
  std::vector<Bucket> buckets;
  std::uint64_t records_R = 0;
  std::uint64_t records_S = 0;
};

inline ShuffleOutput shuffle(const std::vector<RoutedRecord>& routed, std::size_t num_groups) {
  ShuffleOutput out;
  out.buckets.resize(num_groups);
  for (const auto& rr : routed) {
    if (rr.group_id >= num_groups) throw Error("shuffle: group id " + std::to_string(rr.group_id) + " out of range");
    Bucket& b = out.buckets[rr.group_id];
    if (rr.record->source == Source::R) {
      b.r.push_back(rr.record);
      ++out.records_R;
    } else {
      b.s.push_back(rr.record);
      ++out.records_S;
    }
  }
  auto order = [](const AssignmentRecord* a, const AssignmentRecord* b) {
    if (a->partition_id != b->partition_id) return a->partition_id < b->partition_id;
    return a->object.id < b->object.id;
  };
  for (auto& b : out.buckets) {
    std::sort(b.r.begin(), b.r.end(), order);
    std::sort(b.s.begin(), b.s.end(), order);
  }
  return out;
}

/// Called for every (r, s) pair a reducer skips without computing |r, s|.
using PruneObserver = std::function<void(const AssignmentRecord& r, const AssignmentRecord& s)>;

struct ReduceOutput {
  std::vector<JoinRow> rows;
  std::uint64_t rs_pairs = 0;
  std::uint64_t pivot_evals = 0;
};

/// kNN join inside one group. For each r (in partition P_i^R) the bucket's
/// S-partitions are visited by ascending |p_i, p_j|. A partition is skipped
/// when r's distance to the bisector of p_i and p_j exceeds the current
/// threshold; otherwise only objects whose pivot distance lies in the
/// annulus around |r, p_j| are compared. The threshold starts at theta_i
/// and shrinks to the running k-th distance.
inline ReduceOutput reduce_knn_join(const Bucket& bucket, const PivotSet& pv, const SummaryTables& tables,
                                    const Plan& plan, const PruneObserver* observer = nullptr) {
  struct SPartition {
    std::size_t j = 0;
    std::vector<const AssignmentRecord*> objects;  // ascending (dist_to_pivot, id)
    std::vector<double> dists;
  };
  const MetricKind metric = pv.metric;
  const std::size_t k = plan.k;
  ReduceOutput out;

  std::vector<SPartition> parts;
  for (const AssignmentRecord* s : bucket.s) {
    if (parts.empty() || parts.back().j != s->partition_id) parts.push_back({s->partition_id, {}, {}});
    parts.back().objects.push_back(s);
  }
  for (auto& part : parts) {
    std::sort(part.objects.begin(), part.objects.end(), [](const AssignmentRecord* a, const AssignmentRecord* b) {
      if (a->dist_to_pivot != b->dist_to_pivot) return a->dist_to_pivot < b->dist_to_pivot;
      return a->object.id < b->object.id;
    });
    part.dists.reserve(part.objects.size());
    for (const auto* s : part.objects) part.dists.push_back(s->dist_to_pivot);
  }

  auto report = [&](const AssignmentRecord& r, const SPartition& part, std::size_t from, std::size_t to) {
    if (!observer) return;
    for (std::size_t x = from; x < to; ++x) (*observer)(r, *part.objects[x]);
  };

  std::size_t order_for = kNoGroup;
  std::vector<std::size_t> order(parts.size());
  out.rows.reserve(bucket.r.size());
  for (const AssignmentRecord* r : bucket.r) {
    const std::size_t i = r->partition_id;
    if (i != order_for) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double da = plan.cache(i, parts[a].j);
        const double db = plan.cache(i, parts[b].j);
        if (da != db) return da < db;
        return parts[a].j < parts[b].j;
      });
      order_for = i;
    }

    const double theta_i = plan.thetas[i];
    KBest best(k);
    auto threshold = [&] {
      double t = theta_i;
      if (best.full()) t = std::min(t, best.worst().dist);
      return t + plan.theta_slack;
    };

    for (std::size_t x : order) {
      const SPartition& part = parts[x];
      const std::size_t j = part.j;
      double to_pivot_j = r->dist_to_pivot;
      if (j != i) {
        to_pivot_j = distance(r->object, pv[j], metric);
        ++out.pivot_evals;
        if (hyperplane_bound(metric, r->dist_to_pivot, to_pivot_j, plan.cache(i, j)) > threshold()) {
          report(*r, part, 0, part.objects.size());
          continue;
        }
      }
      const PartitionStats& st = tables.t_s[j];
      const double lo = std::max(st.lower, to_pivot_j - threshold());
      const std::size_t start =
          static_cast<std::size_t>(std::lower_bound(part.dists.begin(), part.dists.end(), lo) - part.dists.begin());
      report(*r, part, 0, start);
      for (std::size_t idx = start; idx < part.objects.size(); ++idx) {
        const double th = threshold();
        if (!annulus_admits(to_pivot_j, part.dists[idx], th, st.lower, st.upper)) {
          if (part.dists[idx] > to_pivot_j + th) {
            report(*r, part, idx, part.objects.size());
            break;
          }
          report(*r, part, idx, idx + 1);
          continue;
        }
        const AssignmentRecord* s = part.objects[idx];
        best.offer({s->object.id, distance(r->object, s->object, metric)});
        ++out.rs_pairs;
      }
    }
    if (!best.full()) {
      throw Error("reducer found only " + std::to_string(best.size()) + " neighbor(s) for r " +
                  std::to_string(r->object.id) + "; the bucket lacks required S objects");
    }
    out.rows.push_back({r->object.id, best.sorted()});
  }
  return out;
}

struct Job2Output {
  JoinResult result;
  std::uint64_t records_R = 0;
  std::uint64_t records_S = 0;
  std::uint64_t rs_pairs = 0;
  std::uint64_t pivot_evals = 0;
  std::vector<std::uint64_t> per_group_load;
  std::vector<std::vector<PointId>> bucket_s_ids;  // filled when requested
};

struct PgbjOptions {
  bool capture_buckets = false;
  // Must be safe to call concurrently when worker_count > 1.
  const PruneObserver* observer = nullptr;
};

/// The join job: route (map), group by key (shuffle), per-group kNN join (reduce).
inline Job2Output run_join_job(const PivotSet& pv, const PartitionOutput& job1, const Plan& plan,
                               std::size_t workers, const PgbjOptions& opts = {},
                               std::map<std::string, double>* timings = nullptr) {
  using clock = std::chrono::steady_clock;
  auto ms_since = [](clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  };
  Job2Output out;
  const auto& records = job1.records;

  auto t0 = clock::now();
  const std::size_t chunks = std::max<std::size_t>(1, std::min(records.size(), workers * 4));
  std::vector<std::vector<RoutedRecord>> mapped(chunks);
  parallel_for(chunks, workers, [&](std::size_t c) {
    const auto [begin, end] = chunk_bounds(records.size(), chunks, c);
    for (std::size_t x = begin; x < end; ++x) route_into(records[x], plan.grouping, plan.glb, mapped[c]);
  });
  std::vector<RoutedRecord> routed;
  for (auto& m : mapped) routed.insert(routed.end(), m.begin(), m.end());
  if (timings) (*timings)["map"] = ms_since(t0);

  t0 = clock::now();
  ShuffleOutput shuffled = shuffle(routed, plan.grouping.num_groups);
  out.records_R = shuffled.records_R;
  out.records_S = shuffled.records_S;
  if (timings) (*timings)["shuffle"] = ms_since(t0);

  t0 = clock::now();
  std::vector<ReduceOutput> reduced(shuffled.buckets.size());
  parallel_for(shuffled.buckets.size(), workers, [&](std::size_t g) {
    reduced[g] = reduce_knn_join(shuffled.buckets[g], pv, job1.tables, plan, opts.observer);
  });
  for (std::size_t g = 0; g < reduced.size(); ++g) {
    out.rs_pairs += reduced[g].rs_pairs;
    out.pivot_evals += reduced[g].pivot_evals;
    out.per_group_load.push_back(shuffled.buckets[g].size());
    for (auto& row : reduced[g].rows) out.result.rows.push_back(std::move(row));
  }
  out.result.sort_rows();
  if (opts.capture_buckets) {
    for (const auto& b : shuffled.buckets) {
      std::vector<PointId> ids;
      for (const auto* s : b.s) ids.push_back(s->object.id);
      std::sort(ids.begin(), ids.end());
      out.bucket_s_ids.push_back(std::move(ids));
    }
  }
  if (timings) (*timings)["reduce"] = ms_since(t0);
  return out;
}

/// Fills the PGBJ counters from the artifacts of both jobs.
inline void collect_pgbj_metrics(RunMetrics& m, const PivotSet& pv, const PartitionOutput& job1, const Plan& plan,
                                 Job2Output& job2) {
  std::size_t r_size = 0, s_size = 0;
  for (const auto& st : job1.tables.t_r) r_size += st.count;
  for (const auto& st : job1.tables.t_s) s_size += st.count;
  const std::size_t mp = pv.size();
  m.engine = "PGBJ";
  m.r_size = r_size;
  m.s_size = s_size;
  m.k = plan.k;
  m.num_pivots = mp;
  m.num_groups = plan.grouping.num_groups;
  m.rs_pairs = job2.rs_pairs;
  m.pivot_pairs = static_cast<std::uint64_t>(r_size) * mp;
  m.pivot_distance_evals = static_cast<std::uint64_t>(r_size + s_size) * mp + mp * (mp - 1) / 2 + job2.pivot_evals;
  m.shuffle_records_R = job2.records_R;
  m.shuffle_records_S = job2.records_S;
  m.predicted_replication = predicted_replication(job1.records, plan.glb);
  m.per_group_load = std::move(job2.per_group_load);
  m.group_size = SizeStats::of(plan.grouping.r_count);
  std::vector<std::size_t> part_sizes;
  for (const auto& st : job1.tables.t_r) part_sizes.push_back(st.count);
  m.partition_size = SizeStats::of(part_sizes);
  m.finalize_ratios();
}

inline void validate_join_inputs(const Dataset& R, const Dataset& S, std::size_t k) {
  R.validate();
  S.validate();
  if (R.dim() != S.dim()) {
    throw Error("R has " + std::to_string(R.dim()) + " dimensions but S has " + std::to_string(S.dim()));
  }
  if (k == 0) throw Error("k must be positive");
  if (k > S.size()) {
    throw Error("k (" + std::to_string(k) + ") exceeds |S| (" + std::to_string(S.size()) +
                "); the kNN join would degrade to a cross join");
  }
}

/// Full pipeline state of one PGBJ run, kept for inspection and auditing.
struct PgbjRun {
  JoinResult result;
  RunMetrics metrics;
  PivotSet pivots;
  PartitionOutput job1;
  Plan plan;
  std::uint64_t predicted_replication = 0;
  std::vector<std::vector<PointId>> bucket_s_ids;
};

/// Pivot selection, partitioning job, bound/threshold/grouping plan, join job.
/// `fixed_pivots`, when given, replaces pivot selection.
inline PgbjRun run_pgbj(const Dataset& R, const Dataset& S, const RunConfig& cfg, const PgbjOptions& opts = {},
                        const PivotSet* fixed_pivots = nullptr) {
  using clock = std::chrono::steady_clock;
  auto ms_since = [](clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  };
  cfg.validate();
  validate_join_inputs(R, S, cfg.k);
  log_info("run_pgbj: " + cfg.describe());

  PgbjRun run;
  RunMetrics& m = run.metrics;
  const SeedTree seeds(cfg.seed);

  auto t0 = clock::now();
  if (fixed_pivots) {
    run.pivots = *fixed_pivots;
    run.pivots.metric = cfg.metric;
  } else {
    SelectionConfig sel = cfg.pivots;
    sel.seed = seeds.split("pivots").seed();
    run.pivots = select_pivots(R, sel, cfg.metric);
  }
  m.wall_clock_ms["pivots"] = ms_since(t0);

  t0 = clock::now();
  run.job1 = partition_all(R, S, run.pivots, cfg.k, cfg.worker_count);
  if (!cfg.spill_dir.empty()) {
    const Job1Files files{cfg.spill_dir};
    write_job1(files, run.pivots, run.job1);
    run.pivots = read_job1_pivots(files);
    run.job1 = read_job1(files);
  }
  m.wall_clock_ms["partition"] = ms_since(t0);

  t0 = clock::now();
  run.plan = make_plan(run.pivots, run.job1.tables, cfg);
  if (!cfg.spill_dir.empty()) {
    const Job1Files files{cfg.spill_dir};
    text::write_file(files.plan(), format_plan(run.plan));
    run.plan = read_plan(files.plan(), run.pivots, run.job1.tables);
  }
  run.predicted_replication = predicted_replication(run.job1.records, run.plan.glb);
  m.wall_clock_ms["grouping"] = ms_since(t0);

  Job2Output job2 = run_join_job(run.pivots, run.job1, run.plan, cfg.worker_count, opts, &m.wall_clock_ms);
  run.result = std::move(job2.result);
  run.bucket_s_ids = std::move(job2.bucket_s_ids);

  collect_pgbj_metrics(m, run.pivots, run.job1, run.plan, job2);
  return run;
}

struct EngineRun {
  JoinResult result;
  RunMetrics metrics;
};

/// Random-block baseline: R and S are each shuffled into b = floor(sqrt(N))
/// equal blocks, all b*b block pairs are joined by exhaustive scan, and a
/// merge pass combines the b partial lists of every r.
inline EngineRun run_block_baseline(const Dataset& R, const Dataset& S, const RunConfig& cfg) {
  using clock = std::chrono::steady_clock;
  cfg.validate();
  validate_join_inputs(R, S, cfg.k);
  const auto t0 = clock::now();
  const std::size_t b = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(cfg.num_groups)))));
  if (b * b != cfg.num_groups) {
    log_info("block baseline: N = " + std::to_string(cfg.num_groups) + " is not a perfect square, using " +
             std::to_string(b) + "x" + std::to_string(b) + " blocks");
  }
  const SeedTree seeds = SeedTree(cfg.seed).split("blocks");
  auto permute = [](std::size_t n, std::mt19937_64 rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(idx[i - 1], idx[pick(rng)]);
    }
    return idx;
  };
  const auto r_perm = permute(R.size(), seeds.split("R").engine());
  const auto s_perm = permute(S.size(), seeds.split("S").engine());

  // partial[(a * b + c)] holds, for each r of block a, its k-best within S block c.
  std::vector<std::vector<std::vector<Neighbor>>> partial(b * b);
  parallel_for(b * b, cfg.worker_count, [&](std::size_t task) {
    const std::size_t a = task / b;
    const std::size_t c = task % b;
    const auto [rb, re] = chunk_bounds(R.size(), b, a);
    const auto [sb, se] = chunk_bounds(S.size(), b, c);
    auto& lists = partial[task];
    lists.reserve(re - rb);
    for (std::size_t x = rb; x < re; ++x) {
      const DataPoint& r = R.points[r_perm[x]];
      KBest best(cfg.k);
      for (std::size_t y = sb; y < se; ++y) {
        const DataPoint& s = S.points[s_perm[y]];
        best.offer({s.id, distance(r, s, cfg.metric)});
      }
      lists.push_back(best.sorted());
    }
  });

  EngineRun run;
  RunMetrics& m = run.metrics;
  for (std::size_t a = 0; a < b; ++a) {
    const auto [rb, re] = chunk_bounds(R.size(), b, a);
    for (std::size_t x = rb; x < re; ++x) {
      KBest best(cfg.k);
      for (std::size_t c = 0; c < b; ++c) {
        const auto& list = partial[a * b + c][x - rb];
        m.merge_records += list.size();
        for (const auto& n : list) best.offer(n);
      }
      run.result.rows.push_back({R.points[r_perm[x]].id, best.sorted()});
    }
  }
  run.result.sort_rows();

  m.engine = "BLOCK_BASELINE";
  m.r_size = R.size();
  m.s_size = S.size();
  m.k = cfg.k;
  m.num_groups = b * b;
  m.blocks_per_side = b;
  m.rs_pairs = static_cast<std::uint64_t>(R.size()) * S.size();
  m.shuffle_records_R = static_cast<std::uint64_t>(b) * R.size();
  m.shuffle_records_S = static_cast<std::uint64_t>(b) * S.size();
  for (std::size_t task = 0; task < b * b; ++task) {
    const auto [rb, re] = chunk_bounds(R.size(), b, task / b);
    const auto [sb, se] = chunk_bounds(S.size(), b, task % b);
    m.per_group_load.push_back((re - rb) + (se - sb));
  }
  m.group_size = SizeStats::of(m.per_group_load);
  m.wall_clock_ms["join"] = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  m.finalize_ratios();
  return run;
}

inline EngineRun run_oracle(const Dataset& R, const Dataset& S, const RunConfig& cfg) {
  cfg.validate();
  validate_join_inputs(R, S, cfg.k);
  const auto t0 = std::chrono::steady_clock::now();
  EngineRun run;
  run.result = brute_force_knn_join(R, S, cfg.k, cfg.metric, cfg.worker_count);
  RunMetrics& m = run.metrics;
  m.engine = "ORACLE";
  m.r_size = R.size();
  m.s_size = S.size();
  m.k = cfg.k;
  m.num_groups = 1;
  m.rs_pairs = static_cast<std::uint64_t>(R.size()) * S.size();
  m.shuffle_records_R = R.size();
  m.shuffle_records_S = S.size();
  m.per_group_load = {R.size() + S.size()};
  m.group_size = SizeStats::of(std::vector<std::size_t>{R.size()});
  m.wall_clock_ms["join"] =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  m.finalize_ratios();
  return run;
}

/// Dispatches on cfg.engine.
inline EngineRun run_engine(const Dataset& R, const Dataset& S, const RunConfig& cfg) {
  switch (cfg.engine) {
    case EngineKind::PGBJ: {
      PgbjRun run = run_pgbj(R, S, cfg);
      return {std::move(run.result), std::move(run.metrics)};
    }
    case EngineKind::BLOCK_BASELINE: return run_block_baseline(R, S, cfg);
    case EngineKind::ORACLE: return run_oracle(R, S, cfg);
  }
  throw Error("unknown engine");
}

}  // namespace pgbj
