#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

namespace cadseq {

/// Deterministic random source. Wraps std::mt19937_64 but performs all value
/// conversions by hand so that streams are reproducible independent of the
/// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [lo, hi], both inclusive.
  int uniform_int(int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next_u64() % span);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Standard normal via Box-Muller (two fresh uniforms per call, no cache).
  double gaussian() {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// Independent child stream; deterministic in (seed, id) and insensitive to
  /// how much of the parent stream has been consumed.
  Rng fork(std::uint64_t id) const { return Rng(mix(seed_, id)); }

  std::uint64_t seed() const { return seed_; }

  std::string save_state() const;
  void load_state(const std::string& s);

  static std::uint64_t mix(std::uint64_t a, std::uint64_t b);

 private:
  std::uint64_t seed_;
  std::mt19937_64 eng_;
};

}  // namespace cadseq
