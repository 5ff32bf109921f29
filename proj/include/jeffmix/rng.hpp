#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

#include "jeffmix/math.hpp"

namespace jeffmix {

namespace detail {
// splitmix64 finalizer; used only to derive independent seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

/// Deterministic random source. Every distribution is generated from explicit
/// arithmetic on mt19937_64 output, so streams are bit-identical across
/// platforms and never depend on the C++ library's distribution objects.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Stream-derivation: independent generator for (master, a, b).
  static std::uint64_t derive(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    return detail::mix64(detail::mix64(master ^ 0x6a09e667f3bcc908ULL) + detail::mix64(a) * 3 +
                         detail::mix64(b) * 7);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  /// Standard normal via Box-Muller (two uniforms per draw, no cached spare).
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  double exponential() { return -std::log(uniform01()); }

  /// Gamma(shape, 1) via Marsaglia-Tsang; shape boost for shape < 1.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = uniform01();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double chi_squared(double df) { return 2.0 * gamma(df / 2.0); }

  double student_t(double df) { return normal() / std::sqrt(chi_squared(df) / df); }

  /// Standard Gumbel, maximum convention (right-skewed).
  double gumbel() { return -std::log(exponential()); }

  /// Index draw from (possibly unnormalized is NOT allowed) simplex weights.
  int categorical(std::span<const double> probs) {
    const double u = uniform01();
    double cum = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      cum += probs[i];
      if (u < cum) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
  }

  /// Normal(center, sd) truncated to [lo, hi]. Rejection for small kernels,
  /// inverse-CDF bisection when the kernel dwarfs the interval (where
  /// rejection would stall).
  double truncated_normal(double center, double sd, double lo, double hi) {
    if (sd <= (hi - lo) * 2.0) {
      for (int trial = 0; trial < 4096; ++trial) {
        const double y = center + sd * normal();
        if (y >= lo && y <= hi) return y;
      }
    }
    // z-interval is narrow here (width <= (hi-lo)/sd), so bisection on the CDF
    // keeps full precision.
    const double a = (lo - center) / sd;
    const double b = (hi - center) / sd;
    const double fa = normal_cdf(a);
    const double fb = normal_cdf(b);
    const double target = fa + uniform01() * (fb - fa);
    double zl = a, zh = b;
    for (int i = 0; i < 80; ++i) {
      const double zm = 0.5 * (zl + zh);
      (normal_cdf(zm) < target ? zl : zh) = zm;
    }
    return center + sd * 0.5 * (zl + zh);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace jeffmix
