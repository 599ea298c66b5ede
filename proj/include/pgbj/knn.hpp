#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "pgbj/metric.hpp"

namespace pgbj {

struct Neighbor {
  PointId id = 0;
  double dist = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Shared total order for results: distance, then smaller id.
inline bool closer(const Neighbor& a, const Neighbor& b) {
  if (a.dist != b.dist) return a.dist < b.dist;
  return a.id < b.id;
}

struct JoinRow {
  PointId r_id = 0;
  std::vector<Neighbor> neighbors;  // ascending by (dist, id)

  friend bool operator==(const JoinRow&, const JoinRow&) = default;
};

/// kNN join output, one row per object of R, rows ascending by r_id.
struct JoinResult {
  std::vector<JoinRow> rows;

  std::size_t size() const { return rows.size(); }
  friend bool operator==(const JoinResult&, const JoinResult&) = default;

  void sort_rows() {
    std::sort(rows.begin(), rows.end(), [](const JoinRow& a, const JoinRow& b) { return a.r_id < b.r_id; });
  }
};

/// Bounded max-heap keeping the k closest candidates under `closer`.
class KBest {
 public:
  explicit KBest(std::size_t k) : k_(k) { heap_.reserve(k + 1); }

  bool full() const { return heap_.size() >= k_; }
  std::size_t size() const { return heap_.size(); }
  const Neighbor& worst() const { return heap_.front(); }

  bool offer(const Neighbor& n) {
    if (k_ == 0) return false;
    if (!full()) {
      heap_.push_back(n);
      std::push_heap(heap_.begin(), heap_.end(), closer);
      return true;
    }
    if (!closer(n, heap_.front())) return false;
    std::pop_heap(heap_.begin(), heap_.end(), closer);
    heap_.back() = n;
    std::push_heap(heap_.begin(), heap_.end(), closer);
    return true;
  }

  std::vector<Neighbor> sorted() const {
    std::vector<Neighbor> out = heap_;
    std::sort(out.begin(), out.end(), closer);
    return out;
  }

 private:
  std::size_t k_;
  std::vector<Neighbor> heap_;
};

}  // namespace pgbj
