#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pgbj {

// splitmix64 finalizer; used to derive independent child seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Splittable seed source. Every random decision in a run derives from one
/// root seed through named splits, so changing how one stage consumes
/// randomness never perturbs another stage.
class SeedTree {
 public:
  explicit SeedTree(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  SeedTree split(std::string_view tag) const {
    // FNV-1a over the tag, then mixed with the parent seed.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : tag) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    return SeedTree(mix64(seed_ ^ mix64(h)));
  }

  SeedTree split(std::uint64_t index) const { return SeedTree(mix64(seed_ + mix64(index + 1))); }

  std::mt19937_64 engine() const { return std::mt19937_64(mix64(seed_)); }

 private:
  std::uint64_t seed_;
};

}  // namespace pgbj
