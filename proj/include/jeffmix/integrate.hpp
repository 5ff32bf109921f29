#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "jeffmix/errors.hpp"

namespace jeffmix {

/// Which one-dimensional integrator backs an expectation integral.
/// auto_select resolves to riemann or monte_carlo by the small-sigma rule
/// (see select_integrator in fisher.hpp).
enum class IntegratorMethod { auto_select, riemann, monte_carlo, gauss_kronrod };

struct IntegratorConfig {
  IntegratorMethod method = IntegratorMethod::auto_select;
  int riemann_points = 550;
  int mc_samples = 1500;
  double gk_rel_tol = 1e-8;
  double gk_abs_tol = 1e-12;  // floor for integrals that are exactly zero
  int gk_max_subdivisions = 400;
  /// Truncation rule for riemann/monte-carlo bounds: integrate over
  /// [min_l(mu_l - m*sigma_l), max_l(mu_l + m*sigma_l)] with m = bounds_sigma_mult.
  double bounds_sigma_mult = 8.0;
  /// Below this smallest component scale, auto_select prefers monte_carlo.
  double sigma_switch_threshold = 0.05;
  std::uint64_t seed = 20240901;

  std::string describe() const {
    switch (method) {
      case IntegratorMethod::auto_select: return "auto";
      case IntegratorMethod::riemann: return "riemann:" + std::to_string(riemann_points);
      case IntegratorMethod::monte_carlo: return "mc:" + std::to_string(mc_samples);
      case IntegratorMethod::gauss_kronrod: {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "gk:%g", gk_rel_tol);
        return buf;
      }
    }
    return "?";
  }
};

/// Midpoint Riemann sum with n equal cells on [a, b].
template <typename F>
double riemann_midpoint(F&& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += f(a + (i + 0.5) * h);
  return sum * h;
}

namespace gk {

// Gauss-Kronrod 7-15 nodes and weights on [-1, 1] (positive half; node 7 is 0).
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct SegmentResult {
  double kronrod = 0.0;
  double error = 0.0;
};

template <typename F>
SegmentResult rule15(F&& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double resk = kWgk[7] * f(c);
  double resg = kWg[3] * f(c);
  for (int i = 0; i < 7; ++i) {
    const double fv = f(c - h * kXgk[i]) + f(c + h * kXgk[i]);
    resk += kWgk[i] * fv;
    if (i % 2 == 1) resg += kWg[i / 2] * fv;
  }
  SegmentResult r;
  r.kronrod = resk * h;
  r.error = std::abs((resk - resg) * h);
  return r;
}

}  // namespace gk

struct GaussKronrodResult {
  double value = 0.0;
  double abs_error = 0.0;
  int subdivisions = 1;
  bool converged = false;
};

/// Globally adaptive Gauss-Kronrod: repeatedly bisect the segment with the
/// largest error estimate until the summed error meets rel_tol (with a tiny
/// absolute floor for integrals that are exactly zero).
template <typename F>
GaussKronrodResult gauss_kronrod_adaptive(F&& f, double a, double b, double rel_tol,
                                          int max_subdivisions = 400,
                                          double abs_tol = 1e-12) {
  struct Seg {
    double a, b, value, error;
  };
  std::vector<Seg> segs;
  auto eval = [&](double lo, double hi) {
    const auto r = gk::rule15(f, lo, hi);
    return Seg{lo, hi, r.kronrod, r.error};
  };
  segs.push_back(eval(a, b));
  GaussKronrodResult out;
  for (;;) {
    double total = 0.0, err = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      total += segs[i].value;
      err += segs[i].error;
      if (segs[i].error > segs[worst].error) worst = i;
    }
    out.value = total;
    out.abs_error = err;
    out.subdivisions = static_cast<int>(segs.size());
    if (err <= std::max(rel_tol * std::abs(total), abs_tol)) {
      out.converged = true;
      return out;
    }
    if (static_cast<int>(segs.size()) >= max_subdivisions) return out;
    const Seg w = segs[worst];
    const double mid = 0.5 * (w.a + w.b);
    if (mid <= w.a || mid >= w.b) return out;  // interval exhausted in double precision
    segs[worst] = eval(w.a, mid);
    segs.push_back(eval(mid, w.b));
  }
}

/// Throwing wrapper: non-convergence raises integration_error carrying the
/// partial estimate.
template <typename F>
double gauss_kronrod_or_throw(F&& f, double a, double b, double rel_tol, int max_subdivisions,
                              const std::string& what, double abs_tol = 1e-12) {
  const auto r = gauss_kronrod_adaptive(f, a, b, rel_tol, max_subdivisions, abs_tol);
  if (!r.converged)
    throw integration_error("gauss-kronrod did not converge for " + what + " (error " +
                                std::to_string(r.abs_error) + " after " +
                                std::to_string(r.subdivisions) + " subdivisions)",
                            r.value);
  return r.value;
}

}  // namespace jeffmix
