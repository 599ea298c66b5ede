#pragma once

#include <atomic>
#include <iostream>
#include <mutex>
#include <string_view>

namespace pgbj {

inline std::atomic<bool>& log_enabled() {
  static std::atomic<bool> enabled{false};
  return enabled;
}

inline void log_info(std::string_view msg) {
  if (!log_enabled().load(std::memory_order_relaxed)) return;
  static std::mutex mu;
  std::lock_guard lock(mu);
  std::clog << "[pgbj] " << msg << '\n';
}

}  // namespace pgbj
