#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>

#include "ctr/errors.hpp"

namespace ctr {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z;
}

/// Derive a stream key from (seed, a, b, c). Streams with different keys are
/// statistically independent, so draws never depend on scheduling order.
inline constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a = 0,
                                          std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = mix64(seed + kGolden);
  h = mix64(h ^ (a + kGolden));
  h = mix64(h ^ (b + kGolden));
  h = mix64(h ^ (c + kGolden));
  return h;
}

/// Counter-based generator (splitmix64). Cheap to construct, so the idiom is
/// one short-lived Rng per (seed, sweep, step, node) key.
class Rng {
 public:
  explicit Rng(std::uint64_t key) : ctr_(key) {}

  std::uint64_t next_u64() {
    ctr_ += kGolden;
    return mix64(ctr_);
  }

  /// [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// (0, 1]
  double uniform_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// [0, n)
  std::uint64_t uniform_int(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  bool bernoulli(double p) { return uniform() < p; }

  double normal() {
    double u1 = uniform_pos();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// Marsaglia-Tsang; shape < 1 handled by the usual boost.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw ValidationError("gamma shape must be > 0");
    if (shape < 1.0) {
      double g = gamma(shape + 1.0);
      double u = uniform_pos();
      double r = g * std::pow(u, 1.0 / shape);
      return r > 0.0 ? r : 2.2250738585072014e-308;  // keep strictly positive
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double t = 1.0 + c * x;
      if (t <= 0.0) continue;
      double v = t * t * t;
      double u = uniform_pos();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
  }

  /// Clamped into (0,1) so downstream logs stay finite.
  double beta(double a, double b) {
    double g1 = gamma(a);
    double g2 = gamma(b);
    double r = g1 / (g1 + g2);
    return std::clamp(r, 1e-15, 1.0 - 1e-15);
  }

  /// Index draw proportional to non-negative weights.
  std::size_t discrete(std::span<const double> w) {
    double total = 0.0;
    for (double x : w) total += x;
    if (!(total > 0.0)) throw NumericError("discrete: weights sum to zero");
    double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      acc += w[i];
      if (u < acc) return i;
    }
    return w.size() - 1;
  }

 private:
  std::uint64_t ctr_;
};

}  // namespace ctr
