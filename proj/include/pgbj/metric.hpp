#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace pgbj {

/// Raised for every contract violation the engine treats as fatal.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using PointId = std::uint64_t;

struct DataPoint {
  PointId id = 0;
  std::vector<double> coords;

  std::size_t dim() const { return coords.size(); }
  friend bool operator==(const DataPoint&, const DataPoint&) = default;
};

struct Dataset {
  std::string name;
  std::vector<DataPoint> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  std::size_t dim() const { return points.empty() ? 0 : points.front().dim(); }

  // Throws if the dataset is empty, ragged, zero-dimensional or has repeated ids.
  void validate() const {
    if (points.empty()) throw Error("dataset " + name + " is empty");
    const std::size_t n = points.front().dim();
    if (n == 0) throw Error("dataset " + name + " has zero-dimensional points");
    std::unordered_set<PointId> seen;
    seen.reserve(points.size());
    for (const auto& p : points) {
      if (p.dim() != n) {
        throw Error("dataset " + name + ": point " + std::to_string(p.id) + " has " +
                    std::to_string(p.dim()) + " coordinates, expected " + std::to_string(n));
      }
      if (!seen.insert(p.id).second) {
        throw Error("dataset " + name + ": duplicate id " + std::to_string(p.id));
      }
    }
  }
};

enum class MetricKind { L1, L2, LINF };

inline std::string_view to_string(MetricKind m) {
  switch (m) {
    case MetricKind::L1: return "L1";
    case MetricKind::L2: return "L2";
    case MetricKind::LINF: return "LINF";
  }
  return "?";
}

inline MetricKind parse_metric(std::string_view s) {
  if (s == "L1" || s == "l1") return MetricKind::L1;
  if (s == "L2" || s == "l2") return MetricKind::L2;
  if (s == "LINF" || s == "linf" || s == "Linf") return MetricKind::LINF;
  throw Error("unknown metric '" + std::string(s) + "' (expected L1, L2 or LINF)");
}

// Coordinate-level kernel. No dimensionality check; callers guarantee equal sizes.
inline double raw_distance(std::span<const double> a, std::span<const double> b, MetricKind m) {
  const std::size_t n = a.size();
  switch (m) {
    case MetricKind::L1: {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += std::fabs(a[i] - b[i]);
      return acc;
    }
    case MetricKind::L2: {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
      }
      return std::sqrt(acc);
    }
    case MetricKind::LINF: {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = std::fabs(a[i] - b[i]);
        if (d > acc) acc = d;
      }
      return acc;
    }
  }
  return 0.0;
}

inline double distance(const DataPoint& a, const DataPoint& b, MetricKind m = MetricKind::L2) {
  if (a.dim() != b.dim()) {
    throw Error("dimensionality mismatch: point " + std::to_string(a.id) + " has " +
                std::to_string(a.dim()) + " coordinates, point " + std::to_string(b.id) + " has " +
                std::to_string(b.dim()));
  }
  return raw_distance(a.coords, b.coords, m);
}

}  // namespace pgbj
