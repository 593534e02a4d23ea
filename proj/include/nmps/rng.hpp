#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace nmps {

// Named sub-streams derived from a single run seed. Every stochastic
// component draws from its own stream so that toggling one component never
// shifts the draws seen by another (paired-run comparisons rely on this).
enum class Stream : uint64_t {
  EnvReset = 1,
  TaskSample,
  ExploitAction,
  ExplorAction,
  Controller,
  Replay,
  InitExploit,
  InitExplor,
  SkillPrior,
  Finetune,
  Eval,
  Test,
};

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(splitmix64(seed)) {}
  Rng(uint64_t seed, Stream stream)
      : engine_(splitmix64(seed ^ splitmix64(static_cast<uint64_t>(stream)))) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits; avoids the
  // implementation-defined std::uniform_real_distribution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Unbiased integer in [0, n).
  uint64_t uniform_int(uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Box-Muller; consumes two uniforms per call.
  double normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  // Index sampled proportionally to nonnegative weights.
  size_t categorical(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) {
      if (w < 0.0 || !std::isfinite(w))
        throw std::invalid_argument("categorical: weights must be finite and nonnegative");
      total += w;
    }
    if (total <= 0.0)
      throw std::invalid_argument("categorical: total weight must be positive");
    double u = uniform01() * total;
    for (size_t i = 0; i + 1 < weights.size(); ++i) {
      u -= weights[i];
      if (u < 0.0) return i;
    }
    return weights.size() - 1;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace nmps
