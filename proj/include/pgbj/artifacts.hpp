#pragma once

// Line-oriented text formats for the job-1 outputs and the job-2 plan, so the
// two jobs can run as separate processes. Doubles are written in shortest
// round-trip form; +/-inf sentinels are written as `inf` / `-inf`.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "pgbj/io.hpp"
#include "pgbj/partitioner.hpp"
#include "pgbj/pivots.hpp"
#include "pgbj/plan.hpp"

namespace pgbj {

namespace detail {

inline double field_double(const std::vector<std::string_view>& f, std::size_t i, const std::string& where) {
  double v = 0;
  if (i >= f.size() || !text::parse_double(f[i], v)) throw Error(where + ": bad numeric field " + std::to_string(i + 1));
  return v;
}

inline std::uint64_t field_u64(const std::vector<std::string_view>& f, std::size_t i, const std::string& where) {
  std::uint64_t v = 0;
  if (i >= f.size() || !text::parse_u64(f[i], v)) throw Error(where + ": bad integer field " + std::to_string(i + 1));
  return v;
}

template <class Fn>
void for_each_line(const std::string& content, const std::string& path, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string::npos) end = content.size();
    ++line_no;
    const std::string_view line = text::trim(std::string_view(content).substr(pos, end - pos));
    pos = end + 1;
    if (line.empty() || line.front() == '#') continue;
    fn(text::split(line), path + ": line " + std::to_string(line_no));
  }
}

}  // namespace detail

// ---- pivots -------------------------------------------------------------

inline void write_pivots(const PivotSet& pv, const std::string& path) {
  write_points(Dataset{"pivots", pv.pivots}, path);
}

inline PivotSet read_pivots(const std::string& path, MetricKind metric) {
  Dataset ds = parse_points(path, IdColumn::AUTO);
  return make_pivot_set(std::move(ds.points), metric);
}

// ---- assignment records ---------------------------------------------------

inline std::string format_assignments(const std::vector<AssignmentRecord>& records) {
  std::string out = "source,id,partition,dist_to_pivot,coords...\n";
  for (const auto& r : records) {
    out += to_string(r.source);
    out += ',' + std::to_string(r.object.id) + ',' + std::to_string(r.partition_id) + ',' +
           text::format_double(r.dist_to_pivot);
    for (double v : r.object.coords) out += ',' + text::format_double(v);
    out += '\n';
  }
  return out;
}

inline std::vector<AssignmentRecord> read_assignments(const std::string& path) {
  std::vector<AssignmentRecord> records;
  bool first = true;
  detail::for_each_line(text::read_file(path), path, [&](const auto& f, const std::string& where) {
    if (first) {
      first = false;
      if (f.front() == "source") return;
    }
    if (f.size() < 5) throw Error(where + ": too few fields");
    AssignmentRecord rec;
    if (f[0] == "R") rec.source = Source::R;
    else if (f[0] == "S") rec.source = Source::S;
    else throw Error(where + ": unknown source '" + std::string(f[0]) + "'");
    rec.object.id = detail::field_u64(f, 1, where);
    rec.partition_id = detail::field_u64(f, 2, where);
    rec.dist_to_pivot = detail::field_double(f, 3, where);
    for (std::size_t i = 4; i < f.size(); ++i) rec.object.coords.push_back(detail::field_double(f, i, where));
    records.push_back(std::move(rec));
  });
  return records;
}

// ---- summary tables -------------------------------------------------------

inline std::string format_summary(const SummaryTables& t) {
  std::string out = "partitions," + std::to_string(t.num_partitions()) + ",k," + std::to_string(t.k) + '\n';
  auto emit = [&](char tag, std::size_t i, const PartitionStats& st, bool knn) {
    out += tag;
    out += ',' + std::to_string(i) + ',' + std::to_string(st.count) + ',' + text::format_double(st.lower) + ',' +
           text::format_double(st.upper);
    if (knn) {
      for (double d : st.knn_dists) out += ',' + text::format_double(d);
    }
    out += '\n';
  };
  for (std::size_t i = 0; i < t.num_partitions(); ++i) emit('R', i, t.t_r[i], false);
  for (std::size_t i = 0; i < t.num_partitions(); ++i) emit('S', i, t.t_s[i], true);
  return out;
}

inline SummaryTables read_summary(const std::string& path) {
  SummaryTables t;
  bool sized = false;
  detail::for_each_line(text::read_file(path), path, [&](const auto& f, const std::string& where) {
    if (f[0] == "partitions") {
      t = SummaryTables(detail::field_u64(f, 1, where), detail::field_u64(f, 3, where));
      sized = true;
      return;
    }
    if (!sized) throw Error(where + ": summary header missing");
    if (f[0] != "R" && f[0] != "S") throw Error(where + ": unknown table '" + std::string(f[0]) + "'");
    const std::size_t i = detail::field_u64(f, 1, where);
    if (i >= t.num_partitions()) throw Error(where + ": partition index out of range");
    PartitionStats& st = (f[0] == "R" ? t.t_r : t.t_s)[i];
    st.count = detail::field_u64(f, 2, where);
    st.lower = detail::field_double(f, 3, where);
    st.upper = detail::field_double(f, 4, where);
    for (std::size_t c = 5; c < f.size(); ++c) st.knn_dists.push_back(detail::field_double(f, c, where));
  });
  if (!sized) throw Error(path + ": empty summary");
  return t;
}

// ---- plan (thetas, LB thresholds, grouping, group thresholds) -------------

inline std::string format_plan(const Plan& plan) {
  std::string out = "k," + std::to_string(plan.k) + '\n';
  out += "theta_slack," + text::format_double(plan.theta_slack) + '\n';
  for (std::size_t i = 0; i < plan.thetas.size(); ++i) {
    out += "theta," + std::to_string(i) + ',' + text::format_double(plan.thetas[i]) + '\n';
  }
  for (std::size_t j = 0; j < plan.lb.m; ++j) {
    for (std::size_t i = 0; i < plan.lb.m; ++i) {
      out += "lb," + std::to_string(j) + ',' + std::to_string(i) + ',' + text::format_double(plan.lb.at(j, i)) + '\n';
    }
  }
  for (std::size_t g = 0; g < plan.grouping.num_groups; ++g) {
    out += "group," + std::to_string(g);
    for (std::size_t p : plan.grouping.members[g]) out += ',' + std::to_string(p);
    out += '\n';
  }
  for (std::size_t j = 0; j < plan.glb.num_partitions; ++j) {
    for (std::size_t g = 0; g < plan.glb.num_groups; ++g) {
      out += "glb," + std::to_string(j) + ',' + std::to_string(g) + ',' + text::format_double(plan.glb.at(j, g)) + '\n';
    }
  }
  return out;
}

/// Reads a plan written by format_plan. The pivot distance cache is rebuilt
/// from the pivots; grouping counts are rebuilt from the summary tables.
inline Plan read_plan(const std::string& path, const PivotSet& pv, const SummaryTables& tables) {
  const std::size_t m = tables.num_partitions();
  if (pv.size() != m) throw Error(path + ": pivot count does not match summary tables");
  Plan plan;
  plan.cache = PivotDistanceCache(pv);
  plan.thetas.theta.assign(m, kInf);
  plan.lb = LBTable{m, std::vector<double>(m * m, kInf)};
  std::vector<std::vector<std::size_t>> members;
  std::vector<std::tuple<std::size_t, std::size_t, double>> glb_entries;
  detail::for_each_line(text::read_file(path), path, [&](const auto& f, const std::string& where) {
    const auto tag = f[0];
    if (tag == "k") {
      plan.k = detail::field_u64(f, 1, where);
    } else if (tag == "theta_slack") {
      plan.theta_slack = detail::field_double(f, 1, where);
    } else if (tag == "theta") {
      const std::size_t i = detail::field_u64(f, 1, where);
      if (i >= m) throw Error(where + ": theta index out of range");
      plan.thetas.theta[i] = detail::field_double(f, 2, where);
    } else if (tag == "lb") {
      const std::size_t j = detail::field_u64(f, 1, where);
      const std::size_t i = detail::field_u64(f, 2, where);
      if (j >= m || i >= m) throw Error(where + ": lb index out of range");
      plan.lb.at(j, i) = detail::field_double(f, 3, where);
    } else if (tag == "group") {
      const std::size_t g = detail::field_u64(f, 1, where);
      if (g != members.size()) throw Error(where + ": groups must be listed in order");
      std::vector<std::size_t> parts;
      for (std::size_t c = 2; c < f.size(); ++c) parts.push_back(detail::field_u64(f, c, where));
      members.push_back(std::move(parts));
    } else if (tag == "glb") {
      glb_entries.emplace_back(detail::field_u64(f, 1, where), detail::field_u64(f, 2, where),
                               detail::field_double(f, 3, where));
    } else {
      throw Error(where + ": unknown plan entry '" + std::string(tag) + "'");
    }
  });
  plan.grouping = grouping_from_members(std::move(members), tables);
  plan.glb = group_lb(plan.lb, plan.grouping);
  for (const auto& [j, g, v] : glb_entries) {
    if (j >= m || g >= plan.glb.num_groups || plan.glb.at(j, g) != v) {
      throw Error(path + ": stored group threshold (" + std::to_string(j) + "," + std::to_string(g) +
                  ") disagrees with lb table and grouping");
    }
  }
  return plan;
}

// ---- job-1 directory --------------------------------------------------------

struct Job1Files {
  std::filesystem::path dir;
  std::string pivots() const { return (dir / "pivots.csv").string(); }
  std::string assignments() const { return (dir / "assignments.csv").string(); }
  std::string summary() const { return (dir / "summary.txt").string(); }
  std::string plan() const { return (dir / "plan.txt").string(); }
  std::string meta() const { return (dir / "job1.txt").string(); }
};

inline void write_job1(const Job1Files& files, const PivotSet& pv, const PartitionOutput& out) {
  write_pivots(pv, files.pivots());
  text::write_file(files.meta(), "metric," + std::string(to_string(pv.metric)) + "\n");
  text::write_file(files.assignments(), format_assignments(out.records));
  text::write_file(files.summary(), format_summary(out.tables));
}

inline PartitionOutput read_job1(const Job1Files& files) {
  PartitionOutput out;
  out.records = read_assignments(files.assignments());
  out.tables = read_summary(files.summary());
  canonicalize(out.records);
  return out;
}

/// Pivots of a job-1 directory, under the metric the partitioning used.
inline PivotSet read_job1_pivots(const Job1Files& files) {
  std::optional<MetricKind> metric;
  detail::for_each_line(text::read_file(files.meta()), files.meta(), [&](const auto& f, const std::string& where) {
    if (f[0] == "metric" && f.size() == 2) {
      metric = parse_metric(f[1]);
    } else {
      throw Error(where + ": unknown entry '" + std::string(f[0]) + "'");
    }
  });
  if (!metric) throw Error(files.meta() + ": no metric recorded");
  return read_pivots(files.pivots(), *metric);
}

}  // namespace pgbj
