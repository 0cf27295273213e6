#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fregmice {

/// Keyed random stream.
///
/// A stream is identified by a tuple of integers (seed, stream, iteration,
/// variable, ...). The tuple is folded through SplitMix64 into the engine
/// seed, so any substream can be constructed directly from its key without
/// touching its siblings. Parallel schedules therefore cannot change results.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}
  Rng(std::initializer_list<std::uint64_t> key) : engine_(fold(key)) {}

  static std::uint64_t mix(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  static std::uint64_t fold(std::initializer_list<std::uint64_t> key) noexcept {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (auto k : key) h = mix(h ^ mix(k));
    return h;
  }

  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double p) { return uniform() < p; }
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fregmice
