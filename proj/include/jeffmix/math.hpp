#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace jeffmix {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112353;
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(exp(a) + exp(b)) without overflow; handles -inf operands.
inline double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

/// log sum of exp over a range, two passes (max then sum).
inline double log_sum_exp(std::span<const double> vals) {
  double hi = kNegInf;
  for (double v : vals) hi = std::max(hi, v);
  if (hi == kNegInf) return kNegInf;
  double s = 0.0;
  for (double v : vals) s += std::exp(v - hi);
  return hi + std::log(s);
}

/// Streaming log-sum-exp accumulator for sums too long to buffer.
class LogSumExpAccumulator {
 public:
  void add(double log_term) { acc_ = log_sum_exp(acc_, log_term); }
  double value() const { return acc_; }

 private:
  double acc_ = kNegInf;
};

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Log standard normal CDF of the interval (a, b); assumes a < b.
inline double log_normal_interval_mass(double a, double b) {
  // erfc form keeps the tails from cancelling.
  const double m = normal_cdf(b) - normal_cdf(a);
  return std::log(std::max(m, 1e-300));
}

inline double sqr(double x) { return x * x; }

inline double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += sqr(x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

/// Empirical quantile with linear interpolation on sorted input.
inline double quantile_sorted(std::span<const double> sorted, double q) {
  const std::size_t n = sorted.size();
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  if (n == 1) return sorted[0];
  const double pos = q * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(std::clamp(std::floor(pos), 0.0, double(n - 1)));
  const auto hi = std::min(lo + 1, n - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

inline double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  return quantile_sorted(v, q);
}

}  // namespace jeffmix
