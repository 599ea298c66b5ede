#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "pgbj/knn.hpp"
#include "pgbj/metric.hpp"
#include "pgbj/run_metrics.hpp"

namespace pgbj {

namespace text {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

inline bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

inline bool is_integer_literal(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

inline bool parse_u64(std::string_view s, std::uint64_t& out) {
  if (!is_integer_literal(s)) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

/// Shortest representation that parses back to the identical double.
inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline std::string format_sig12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace text

enum class IdColumn { AUTO, PRESENT, ABSENT };

/// Parses point rows `id,v1,...,vn` or `v1,...,vn`. One optional header line
/// is recognized by a non-numeric first field; its first column named `id`
/// selects the id layout. Without a header, AUTO treats the first column as
/// ids when every row has an integer literal there and at least two fields.
inline Dataset parse_points_text(std::string_view content, std::string name = "dataset",
                                 IdColumn mode = IdColumn::AUTO) {
  struct Row {
    std::size_t line_no;
    std::vector<std::string> fields;
  };
  std::vector<Row> rows;
  bool header = false;
  bool header_has_id = false;
  std::size_t line_no = 0;
  std::istringstream in{std::string(content)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = text::trim(raw);
    if (line.empty()) continue;
    std::vector<std::string> fields;
    for (auto f : text::split(line)) fields.emplace_back(f);
    double probe = 0;
    if (rows.empty() && !header && !text::parse_double(fields.front(), probe)) {
      header = true;
      std::string first = fields.front();
      for (auto& c : first) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      header_has_id = first == "id";
      continue;
    }
    rows.push_back({line_no, std::move(fields)});
  }
  if (rows.empty()) throw Error(name + ": no data rows");

  const std::size_t width = rows.front().fields.size();
  bool with_id = false;
  if (mode == IdColumn::PRESENT) {
    with_id = true;
  } else if (mode == IdColumn::AUTO) {
    if (header) {
      with_id = header_has_id;
    } else {
      with_id = width >= 2;
      for (const auto& r : rows) {
        if (!r.fields.empty() && !text::is_integer_literal(r.fields.front())) {
          with_id = false;
          break;
        }
      }
    }
  }
  if (with_id && width < 2) throw Error(name + ": line " + std::to_string(rows.front().line_no) + ": id column without coordinates");

  Dataset ds;
  ds.name = std::move(name);
  ds.points.reserve(rows.size());
  std::unordered_set<PointId> seen;
  for (std::size_t idx = 0; idx < rows.size(); ++idx) {
    const Row& r = rows[idx];
    const std::string where = ds.name + ": line " + std::to_string(r.line_no);
    if (r.fields.size() != width) {
      throw Error(where + ": expected " + std::to_string(width) + " fields, found " + std::to_string(r.fields.size()));
    }
    DataPoint p;
    std::size_t first_coord = 0;
    if (with_id) {
      if (!text::parse_u64(r.fields[0], p.id)) throw Error(where + ": invalid id '" + r.fields[0] + "'");
      first_coord = 1;
    } else {
      p.id = idx;
    }
    if (!seen.insert(p.id).second) throw Error(where + ": duplicate id " + std::to_string(p.id));
    p.coords.reserve(width - first_coord);
    for (std::size_t f = first_coord; f < width; ++f) {
      double v = 0;
      if (!text::parse_double(r.fields[f], v)) {
        throw Error(where + ": non-numeric field '" + r.fields[f] + "'");
      }
      p.coords.push_back(v);
    }
    ds.points.push_back(std::move(p));
  }
  return ds;
}

inline Dataset parse_points(const std::string& path, IdColumn mode = IdColumn::AUTO) {
  return parse_points_text(text::read_file(path), path, mode);
}

inline std::string format_points(const Dataset& ds) {
  std::string out = "id";
  for (std::size_t d = 0; d < ds.dim(); ++d) out += ",x" + std::to_string(d + 1);
  out += '\n';
  for (const auto& p : ds.points) {
    out += std::to_string(p.id);
    for (double v : p.coords) {
      out += ',';
      out += text::format_double(v);
    }
    out += '\n';
  }
  return out;
}

inline void write_points(const Dataset& ds, const std::string& path) { text::write_file(path, format_points(ds)); }

/// Result lines `r_id,rank,s_id,distance`, rank 1..k, 12 significant digits.
inline std::string format_result(const JoinResult& result) {
  std::string out;
  for (const auto& row : result.rows) {
    for (std::size_t rank = 0; rank < row.neighbors.size(); ++rank) {
      const auto& n = row.neighbors[rank];
      out += std::to_string(row.r_id) + ',' + std::to_string(rank + 1) + ',' + std::to_string(n.id) + ',' +
             text::format_sig12(n.dist) + '\n';
    }
  }
  return out;
}

inline void write_result(const JoinResult& result, const std::string& path) {
  text::write_file(path, format_result(result));
}

inline nlohmann::ordered_json metrics_json(const RunMetrics& m) {
  nlohmann::ordered_json j;
  j["engine"] = m.engine;
  j["r_size"] = m.r_size;
  j["s_size"] = m.s_size;
  j["k"] = m.k;
  j["num_pivots"] = m.num_pivots;
  j["num_groups"] = m.num_groups;
  j["pairs_computed"] = m.pairs_computed;
  j["rs_pairs"] = m.rs_pairs;
  j["pivot_pairs"] = m.pivot_pairs;
  j["pivot_distance_evals"] = m.pivot_distance_evals;
  j["selectivity"] = m.selectivity;
  j["shuffle_records_R"] = m.shuffle_records_R;
  j["shuffle_records_S"] = m.shuffle_records_S;
  j["merge_records"] = m.merge_records;
  j["predicted_replication"] = m.predicted_replication;
  j["avg_replication_alpha"] = m.avg_replication_alpha;
  j["per_group_load"] = m.per_group_load;
  j["group_size_min"] = m.group_size.min;
  j["group_size_max"] = m.group_size.max;
  j["group_size_avg"] = m.group_size.avg;
  j["group_size_dev"] = m.group_size.dev;
  j["partition_size_min"] = m.partition_size.min;
  j["partition_size_max"] = m.partition_size.max;
  j["partition_size_avg"] = m.partition_size.avg;
  j["partition_size_dev"] = m.partition_size.dev;
  j["blocks_per_side"] = m.blocks_per_side;
  for (const auto& [phase, ms] : m.wall_clock_ms) j["wall_clock_ms_" + phase] = ms;
  return j;
}

inline void write_metrics(const RunMetrics& m, const std::string& path) {
  text::write_file(path, metrics_json(m).dump(2) + "\n");
}

}  // namespace pgbj
