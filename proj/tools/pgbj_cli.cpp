// pgbj: command-line front end for the kNN join pipeline.
//
//   pgbj generate --kind gaussian --dim 10 --count 20000 --clusters 20 --output R.csv
//   pgbj partition --r_path R.csv --s_path S.csv --num_pivots 200 --k 10 --job1_dir out/
//   pgbj group --job1_dir out/ --num_groups 9
//   pgbj join --job1_dir out/ --result_path knn.csv --metrics_path metrics.json
//   pgbj join --r_path R.csv --s_path S.csv --k 10 --num_pivots 200 --num_groups 9 ...

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pgbj/pgbj.hpp"

namespace {

using namespace pgbj;

struct Options {
  RunConfig cfg;
  std::string metric = "L2";
  std::string pivot_strategy = "RANDOM";
  std::string grouping_strategy = "GEOMETRIC";
  std::string engine = "PGBJ";
  std::string id_column = "auto";
  std::string job1_dir;
  std::string pivots_path;
  std::string input;
  std::string output;
  bool quiet = false;

  // generate
  std::string kind = "uniform";
  std::size_t dim = 2;
  std::size_t count = 1000;
  std::size_t clusters = 10;
  // expand
  std::size_t factor = 1;
  // bench
  std::vector<std::size_t> k_values;
  std::vector<std::size_t> pivot_values;
  std::vector<std::string> strategies;
  std::vector<std::string> engines;
};

IdColumn parse_id_column(const std::string& s) {
  if (s == "auto") return IdColumn::AUTO;
  if (s == "present" || s == "yes") return IdColumn::PRESENT;
  if (s == "absent" || s == "no") return IdColumn::ABSENT;
  throw Error("unknown id_column mode '" + s + "' (auto, present, absent)");
}

void resolve(Options& o) {
  o.cfg.metric = parse_metric(o.metric);
  o.cfg.pivots.strategy = parse_pivot_strategy(o.pivot_strategy);
  o.cfg.grouping_strategy = parse_grouping_strategy(o.grouping_strategy);
  o.cfg.engine = parse_engine(o.engine);
  o.cfg.pivots.seed = o.cfg.seed;
  log_enabled() = !o.quiet;
}

void log_config(const std::string& verb, const Options& o) {
  std::ostringstream os;
  os << verb << ": " << o.cfg.describe();
  if (!o.cfg.r_path.empty()) os << " r_path=" << o.cfg.r_path;
  if (!o.cfg.s_path.empty()) os << " s_path=" << o.cfg.s_path;
  if (!o.cfg.result_path.empty()) os << " result_path=" << o.cfg.result_path;
  if (!o.cfg.metrics_path.empty()) os << " metrics_path=" << o.cfg.metrics_path;
  if (!o.job1_dir.empty()) os << " job1_dir=" << o.job1_dir;
  os << " id_column=" << o.id_column;
  log_info(os.str());
}

Dataset load(const std::string& path, const Options& o, const char* what) {
  if (path.empty()) throw Error(std::string("missing --") + what);
  return parse_points(path, parse_id_column(o.id_column));
}

void add_run_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--k", o.cfg.k, "neighbors per object");
  cmd->add_option("--metric", o.metric, "L1, L2 or LINF");
  cmd->add_option("--pivot_strategy", o.pivot_strategy, "RANDOM, FARTHEST or KMEANS");
  cmd->add_option("--num_pivots", o.cfg.pivots.num_pivots, "number of pivots");
  cmd->add_option("--num_trials", o.cfg.pivots.num_trials, "candidate sets for RANDOM");
  cmd->add_option("--sample_size", o.cfg.pivots.sample_size, "sample for FARTHEST/KMEANS (0 = min(|R|, 10m))");
  cmd->add_option("--max_iterations", o.cfg.pivots.max_iterations, "k-means iteration cap");
  cmd->add_option("--num_groups", o.cfg.num_groups, "reducer groups N");
  cmd->add_option("--grouping_strategy", o.grouping_strategy, "GEOMETRIC, GREEDY or NONE");
  cmd->add_option("--engine", o.engine, "PGBJ, BLOCK_BASELINE or ORACLE");
  cmd->add_option("--worker_count", o.cfg.worker_count, "worker threads");
  cmd->add_option("--seed", o.cfg.seed, "root seed");
  cmd->add_option("--theta_slack", o.cfg.theta_slack, "added to every theta");
  cmd->add_option("--spill_dir", o.cfg.spill_dir, "persist job-1 artifacts here between jobs");
  cmd->add_option("--r_path", o.cfg.r_path, "R points (csv)");
  cmd->add_option("--s_path", o.cfg.s_path, "S points (csv); defaults to R for a self-join");
  cmd->add_option("--result_path", o.cfg.result_path, "kNN result output");
  cmd->add_option("--metrics_path", o.cfg.metrics_path, "metrics json output");
  cmd->add_option("--id_column", o.id_column, "auto, present or absent");
}

PivotSet pivots_for(const Dataset& R, const Options& o) {
  if (!o.pivots_path.empty()) return read_pivots(o.pivots_path, o.cfg.metric);
  SelectionConfig sel = o.cfg.pivots;
  sel.seed = SeedTree(o.cfg.seed).split("pivots").seed();
  return select_pivots(R, sel, o.cfg.metric);
}

int cmd_pivots(Options& o) {
  log_config("pivots", o);
  const Dataset R = load(o.cfg.r_path, o, "r_path");
  const PivotSet pv = pivots_for(R, o);
  if (o.output.empty()) throw Error("missing --output");
  write_pivots(pv, o.output);
  log_info("wrote " + std::to_string(pv.size()) + " pivots to " + o.output);
  return 0;
}

int cmd_partition(Options& o) {
  log_config("partition", o);
  const Dataset R = load(o.cfg.r_path, o, "r_path");
  const Dataset S = o.cfg.s_path.empty() ? R : load(o.cfg.s_path, o, "s_path");
  validate_join_inputs(R, S, o.cfg.k);
  if (o.job1_dir.empty()) throw Error("missing --job1_dir");
  const PivotSet pv = pivots_for(R, o);
  const PartitionOutput out = partition_all(R, S, pv, o.cfg.k, o.cfg.worker_count);
  write_job1(Job1Files{o.job1_dir}, pv, out);
  log_info("wrote job-1 artifacts for " + std::to_string(out.records.size()) + " objects to " + o.job1_dir);
  return 0;
}

int cmd_group(Options& o) {
  log_config("group", o);
  if (o.job1_dir.empty()) throw Error("missing --job1_dir");
  const Job1Files files{o.job1_dir};
  const PivotSet pv = read_job1_pivots(files);
  const PartitionOutput job1 = read_job1(files);
  RunConfig cfg = o.cfg;
  cfg.k = job1.tables.k;
  const Plan plan = make_plan(pv, job1.tables, cfg);
  text::write_file(files.plan(), format_plan(plan));
  log_info("grouped into " + std::to_string(plan.grouping.num_groups) + " groups, predicted S replicas " +
           std::to_string(predicted_replication(job1.records, plan.glb)));
  return 0;
}

void emit(const JoinResult& result, const RunMetrics& metrics, const Options& o) {
  if (!o.cfg.result_path.empty()) write_result(result, o.cfg.result_path);
  if (!o.cfg.metrics_path.empty()) write_metrics(metrics, o.cfg.metrics_path);
  log_info("pairs_computed=" + std::to_string(metrics.pairs_computed) +
           " selectivity=" + text::format_sig12(metrics.selectivity) +
           " shuffle_records_S=" + std::to_string(metrics.shuffle_records_S));
}

int cmd_join(Options& o) {
  log_config("join", o);
  if (!o.job1_dir.empty()) {
    const Job1Files files{o.job1_dir};
    const PivotSet pv = read_job1_pivots(files);
    const PartitionOutput job1 = read_job1(files);
    const Plan plan = read_plan(files.plan(), pv, job1.tables);
    log_info("loaded " + o.job1_dir + ": metric=" + std::string(to_string(pv.metric)) +
             " num_pivots=" + std::to_string(pv.size()) + " k=" + std::to_string(plan.k) +
             " num_groups=" + std::to_string(plan.grouping.num_groups) +
             " theta_slack=" + text::format_double(plan.theta_slack));
    RunMetrics metrics;
    Job2Output job2 = run_join_job(pv, job1, plan, o.cfg.worker_count, {}, &metrics.wall_clock_ms);
    JoinResult result = std::move(job2.result);
    collect_pgbj_metrics(metrics, pv, job1, plan, job2);
    emit(result, metrics, o);
    return 0;
  }
  const Dataset R = load(o.cfg.r_path, o, "r_path");
  const Dataset S = o.cfg.s_path.empty() ? R : load(o.cfg.s_path, o, "s_path");
  const EngineRun run = run_engine(R, S, o.cfg);
  emit(run.result, run.metrics, o);
  return 0;
}

int cmd_oracle(Options& o) {
  o.cfg.engine = EngineKind::ORACLE;
  return cmd_join(o);
}

int cmd_expand(Options& o) {
  log_config("expand", o);
  if (o.input.empty() || o.output.empty()) throw Error("expand needs --input and --output");
  const Dataset in = parse_points(o.input, parse_id_column(o.id_column));
  const Dataset out = expand_dataset(in, o.factor);
  write_points(out, o.output);
  log_info("expanded " + std::to_string(in.size()) + " to " + std::to_string(out.size()) + " points");
  return 0;
}

int cmd_generate(Options& o) {
  log_info("generate: kind=" + o.kind + " dim=" + std::to_string(o.dim) + " count=" + std::to_string(o.count) +
           " clusters=" + std::to_string(o.clusters) + " seed=" + std::to_string(o.cfg.seed));
  if (o.output.empty()) throw Error("missing --output");
  write_points(generate_synthetic(parse_synthetic_kind(o.kind), o.dim, o.count, o.clusters, o.cfg.seed), o.output);
  return 0;
}

// Sweep over k, pivot counts and strategy labels; one CSV row per run.
int cmd_bench(Options& o) {
  log_config("bench", o);
  const Dataset R = load(o.cfg.r_path, o, "r_path");
  const Dataset S = o.cfg.s_path.empty() ? R : load(o.cfg.s_path, o, "s_path");
  if (o.k_values.empty()) o.k_values = {o.cfg.k};
  if (o.pivot_values.empty()) o.pivot_values = {o.cfg.pivots.num_pivots};
  if (o.strategies.empty()) o.strategies = {o.cfg.strategy_label()};
  if (o.engines.empty()) o.engines = {"PGBJ"};

  std::ostringstream table;
  table << "engine,strategy,k,num_pivots,num_groups,pairs_computed,selectivity,shuffle_records_R,"
           "shuffle_records_S,avg_replication_alpha,merge_records,group_size_dev,wall_clock_ms\n";
  for (const auto& engine : o.engines) {
    for (const auto& label : o.strategies) {
      for (std::size_t m : o.pivot_values) {
        for (std::size_t k : o.k_values) {
          RunConfig cfg = o.cfg;
          cfg.engine = parse_engine(engine);
          cfg.k = k;
          cfg.pivots.num_pivots = m;
          if (label.size() != 3) throw Error("strategy label '" + label + "' must look like RGE, KGR, FGE, RNG");
          cfg.pivots.strategy = label[0] == 'R' ? PivotStrategy::RANDOM
                                : label[0] == 'F' ? PivotStrategy::FARTHEST
                                : label[0] == 'K' ? PivotStrategy::KMEANS
                                                  : throw Error("unknown pivot letter in '" + label + "'");
          const std::string g = label.substr(1);
          cfg.grouping_strategy = g == "GE" ? GroupingStrategy::GEOMETRIC
                                  : g == "GR" ? GroupingStrategy::GREEDY
                                  : g == "NG" ? GroupingStrategy::NONE
                                              : throw Error("unknown grouping in '" + label + "'");
          const auto t0 = std::chrono::steady_clock::now();
          const EngineRun run = run_engine(R, S, cfg);
          const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
          const RunMetrics& mt = run.metrics;
          table << mt.engine << ',' << label << ',' << k << ',' << m << ',' << mt.num_groups << ','
                << mt.pairs_computed << ',' << text::format_sig12(mt.selectivity) << ',' << mt.shuffle_records_R
                << ',' << mt.shuffle_records_S << ',' << text::format_sig12(mt.avg_replication_alpha) << ','
                << mt.merge_records << ',' << text::format_sig12(mt.group_size.dev) << ','
                << text::format_sig12(ms) << '\n';
        }
      }
    }
  }
  if (o.output.empty()) {
    std::cout << table.str();
  } else {
    text::write_file(o.output, table.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pgbj: exact kNN join over Voronoi pivot partitions"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_flag("--quiet", o.quiet, "suppress progress logging");

  auto* pivots = app.add_subcommand("pivots", "select pivots from R");
  add_run_flags(pivots, o);
  pivots->add_option("--output", o.output, "pivot csv output")->required();

  auto* partition = app.add_subcommand("partition", "job 1: Voronoi partitioning and summary tables");
  add_run_flags(partition, o);
  partition->add_option("--job1_dir", o.job1_dir, "artifact directory")->required();
  partition->add_option("--pivots", o.pivots_path, "use these pivots instead of selecting");

  auto* group = app.add_subcommand("group", "compute bounds and grouping from job-1 artifacts");
  add_run_flags(group, o);
  group->add_option("--job1_dir", o.job1_dir, "artifact directory")->required();

  auto* join = app.add_subcommand("join", "kNN join, end to end or from job-1 artifacts and plan");
  add_run_flags(join, o);
  join->add_option("--job1_dir", o.job1_dir, "resume from this artifact directory");

  auto* oracle = app.add_subcommand("oracle", "brute-force kNN join");
  add_run_flags(oracle, o);

  auto* expand = app.add_subcommand("expand", "grow a dataset by an integer factor");
  expand->add_option("--input", o.input, "input csv")->required();
  expand->add_option("--output", o.output, "output csv")->required();
  expand->add_option("--factor", o.factor, "expansion factor t >= 1")->required();
  expand->add_option("--id_column", o.id_column, "auto, present or absent");

  auto* generate = app.add_subcommand("generate", "synthetic point cloud");
  generate->add_option("--kind", o.kind, "uniform or gaussian_mixture");
  generate->add_option("--dim", o.dim, "dimensionality");
  generate->add_option("--count", o.count, "number of points");
  generate->add_option("--clusters", o.clusters, "mixture components");
  generate->add_option("--seed", o.cfg.seed, "seed");
  generate->add_option("--output", o.output, "output csv")->required();

  auto* bench = app.add_subcommand("bench", "sweep k / pivots / strategies and print a metrics table");
  add_run_flags(bench, o);
  bench->add_option("--k_values", o.k_values, "k values to sweep")->delimiter(',');
  bench->add_option("--num_pivots_values", o.pivot_values, "pivot counts to sweep")->delimiter(',');
  bench->add_option("--strategies", o.strategies, "labels such as RGE,RGR,KGE,KGR")->delimiter(',');
  bench->add_option("--engines", o.engines, "PGBJ, BLOCK_BASELINE, ORACLE")->delimiter(',');
  bench->add_option("--output", o.output, "csv output (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);
  try {
    resolve(o);
    if (*pivots) return cmd_pivots(o);
    if (*partition) return cmd_partition(o);
    if (*group) return cmd_group(o);
    if (*join) return cmd_join(o);
    if (*oracle) return cmd_oracle(o);
    if (*expand) return cmd_expand(o);
    if (*generate) return cmd_generate(o);
    if (*bench) return cmd_bench(o);
  } catch (const std::exception& e) {
    std::cerr << "pgbj: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
