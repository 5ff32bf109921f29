#pragma once

#include <cmath>
#include <vector>

#include "jeffmix/errors.hpp"
#include "jeffmix/fisher.hpp"
#include "jeffmix/linalg.hpp"
#include "jeffmix/reparam.hpp"

namespace jeffmix {

/// An unnormalized log prior evaluation. Most of these priors are improper,
/// so values are comparable only within a fixed scenario and method.
struct LogPriorValue {
  double value = 0.0;
  Scenario scenario;
  IntegratorConfig method;       // resolved
  bool jitter_applied = false;   // an eigenvalue was clamped in the log-det
};

/// log pi^J(params | scenario) = 0.5 log det I(params), unnormalized.
inline LogPriorValue log_jeffreys(const MixtureParams& params, const Scenario& scenario,
                                  const IntegratorConfig& cfg) {
  const IntegratorConfig rc = select_integrator(params, cfg);
  const FisherMatrix f = fim(params, scenario, rc);
  const LogDetResult ld = log_det_psd(f.entries);
  LogPriorValue out;
  out.value = 0.5 * ld.value;
  out.scenario = scenario;
  out.method = rc;
  out.jitter_applied = ld.clamped;
  return out;
}

// Exact-boundary weights are evaluated by limit on a clamped simplex.
inline constexpr double kSimplexClampEps = 1e-6;

/// Conditional Jeffreys prior for the weights given fixed component
/// parameters: 0.5 log det of the (k-1)x(k-1) weights information matrix.
/// k = 1 has an empty chart and log prior 0.
inline LogPriorValue log_jeffreys_weights(const std::vector<double>& p,
                                          const MixtureParams& components,
                                          const IntegratorConfig& cfg) {
  if (p.size() != components.weights.size())
    throw parameter_domain_error("weights length does not match component count");
  MixtureParams params = components;
  params.weights = p;
  bool boundary = false;
  for (double& w : params.weights) {
    if (w < kSimplexClampEps) {
      w = kSimplexClampEps;
      boundary = true;
    }
  }
  if (boundary) {
    double s = 0.0;
    for (double w : params.weights) s += w;
    for (double& w : params.weights) w /= s;
  }
  params.validate();
  if (params.k() == 1) {
    LogPriorValue out;
    out.scenario = Scenario::weights_only();
    out.method = select_integrator(params, cfg);
    return out;
  }
  try {
    return log_jeffreys(params, Scenario::weights_only(), cfg);
  } catch (const degenerate_information_error& e) {
    if (boundary)
      throw boundary_evaluation_error(
          std::string("weights prior degenerates at the simplex boundary; evaluate the "
                      "interior limit instead: ") +
          e.what());
    throw;
  }
}

/// Conditional weights prior for components of mixed families (the
/// prior-shape studies pair gaussian and student-t components).
inline double log_jeffreys_weights_hetero(const std::vector<double>& weights,
                                          const std::vector<ComponentSpec>& comps,
                                          const IntegratorConfig& cfg) {
  std::vector<double> w = weights;
  bool boundary = false;
  for (double& x : w) {
    if (x < kSimplexClampEps) {
      x = kSimplexClampEps;
      boundary = true;
    }
  }
  if (boundary) {
    double s = 0.0;
    for (double x : w) s += x;
    for (double& x : w) x /= s;
  }
  try {
    return 0.5 * log_det_psd(weights_fim_hetero(w, comps, cfg)).value;
  } catch (const degenerate_information_error& e) {
    if (boundary)
      throw boundary_evaluation_error(
          std::string("weights prior degenerates at the simplex boundary; evaluate the "
                      "interior limit instead: ") +
          e.what());
    throw;
  }
}

/// Normalized log density of Dirichlet(1/2, ..., 1/2) at an interior simplex
/// point.
inline double log_dirichlet_half(const std::vector<double>& p) {
  const int k = static_cast<int>(p.size());
  if (k < 1) throw parameter_domain_error("empty simplex point");
  double sum = 0.0;
  for (double v : p) {
    if (!(v > 0.0) || v >= 1.0)
      throw parameter_domain_error("dirichlet density needs a strictly interior point");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw parameter_domain_error("weights do not sum to 1");
  double out = std::lgamma(0.5 * k) - k * std::lgamma(0.5);
  for (double v : p) out -= 0.5 * std::log(v);
  return out;
}

/// Closed-form two-piece prior log(1/(s1 s2 (s1+s2))), unnormalized; kept as a
/// cross-check utility. Independent of mu.
inline double log_rubio_steel(double /*mu*/, double sigma1, double sigma2) {
  if (!(sigma1 > 0.0) || !(sigma2 > 0.0))
    throw parameter_domain_error("scales must be positive");
  return -std::log(sigma1) - std::log(sigma2) - std::log(sigma1 + sigma2);
}

// The conditional-delta integrand decays like x^2 exp(-x^2/2), so +-12
// standardized units hold the whole integral to far below double precision.
inline constexpr double kDeltaPriorHalfWidth = 12.0;

/// Conditional prior for the standardized offset delta at fixed reference
/// location: 0.5 log of a score-ratio integral. Flattens to a constant as
/// |delta| grows, which is what makes the prior improper.
inline double log_delta_conditional(double delta, double p, double sigma, double tau,
                                    const IntegratorConfig& cfg) {
  if (!(sigma > 0.0) || !(tau > 0.0))
    throw parameter_domain_error("sigma and tau must be positive");
  if (!(p > 0.0) || !(p < 1.0)) throw parameter_domain_error("p must lie in (0,1)");
  const double shift = delta / (sigma * tau);
  auto f = [&](double x) {
    const double num = sqr((1.0 - p) * x * std::exp(-0.5 * x * x));
    const double den = p * sigma * std::exp(-0.5 * sqr(sigma) * sqr(x + shift)) +
                       (1.0 - p) * std::exp(-0.5 * x * x);
    if (!(den > 0.0)) return 0.0;
    return num / den;
  };
  const double integral =
      gauss_kronrod_or_throw(f, -kDeltaPriorHalfWidth, kDeltaPriorHalfWidth, cfg.gk_rel_tol,
                             cfg.gk_max_subdivisions, "conditional delta prior");
  return 0.5 * std::log(integral);
}

/// Jeffreys prior expressed in the reference-location/scale chart:
/// the natural-chart value plus the log chart Jacobian. Constant in mu and,
/// for k = 2, powered as tau^{-2}.
inline double log_jeffreys_reparam(const ReparamParams& r, const ComponentFamily& family,
                                   const IntegratorConfig& cfg) {
  const MixtureParams params = from_reparam(r, family);
  return log_jeffreys(params, Scenario::all_params(), cfg).value +
         log_abs_det_reparam_jacobian(r);
}

namespace detail {

/// Jacobian of the natural chart (p_1..p_{k-1}, mu_1..mu_k, s_1..s_k) with
/// respect to the reduced reparametrized chart (sticks, mu, deltas, tau),
/// scale ratios held fixed. Rows follow the all_params ordering; columns are
/// (s_0..s_{k-2}, mu, d_0..d_{k-2}, tau), 2k in total.
inline std::vector<std::vector<double>> reparam_chart_jacobian(const ReparamParams& r) {
  const int k = r.k();
  const int rows = 3 * k - 1;
  const int cols = 2 * k;
  std::vector<std::vector<double>> jac(rows, std::vector<double>(cols, 0.0));

  // weights block: p_j = s_j * prod_{m<j} (1 - s_m)
  std::vector<double> remaining(k - 1, 1.0);
  for (int j = 1; j < k - 1; ++j)
    remaining[j] = remaining[j - 1] * (1.0 - r.sticks[j - 1]);
  for (int j = 0; j < k - 1; ++j) {
    const double pj = remaining[j] * r.sticks[j];
    jac[j][j] = remaining[j];
    for (int m = 0; m < j; ++m) jac[j][m] = -pj / (1.0 - r.sticks[m]);
  }

  // natural locations/scales from the cascade
  std::vector<double> sd(k), mu(k);
  sd[0] = r.tau;
  mu[0] = r.mu;
  for (int l = 1; l < k; ++l) {
    mu[l] = mu[l - 1] + sd[l - 1] * r.deltas[l - 1];
    sd[l] = sd[l - 1] * r.scale_ratios[l - 1];
  }
  const int col_mu = k - 1;
  const int col_delta0 = k;
  const int col_tau = 2 * k - 1;
  for (int l = 0; l < k; ++l) {
    const int row_mu = (k - 1) + l;
    const int row_sd = (2 * k - 1) + l;
    jac[row_mu][col_mu] = 1.0;
    jac[row_mu][col_tau] = (mu[l] - r.mu) / r.tau;
    for (int j = 0; j < l; ++j) jac[row_mu][col_delta0 + j] = sd[j];
    jac[row_sd][col_tau] = sd[l] / r.tau;
  }
  return jac;
}

}  // namespace detail

/// Conditional Jeffreys prior for (sticks, mu, deltas, tau) with the scale
/// ratios held fixed: 0.5 log det of J^T I J, the information matrix pulled
/// back to the reduced chart.
inline LogPriorValue log_jeffreys_reparam_given_ratios(const ReparamParams& r,
                                                       const ComponentFamily& family,
                                                       const IntegratorConfig& cfg) {
  const MixtureParams params = from_reparam(r, family);
  const IntegratorConfig rc = select_integrator(params, cfg);
  const FisherMatrix nat = fim(params, Scenario::all_params(), rc);
  const auto jac = detail::reparam_chart_jacobian(r);
  const int rows = nat.dim;
  const int cols = 2 * r.k();
  // M = J^T I J
  SymMatrix m(cols);
  std::vector<std::vector<double>> ij(rows, std::vector<double>(cols, 0.0));
  for (int a = 0; a < rows; ++a)
    for (int c = 0; c < cols; ++c) {
      double s = 0.0;
      for (int b = 0; b < rows; ++b) s += nat.entries.at(a, b) * jac[b][c];
      ij[a][c] = s;
    }
  for (int c1 = 0; c1 < cols; ++c1)
    for (int c2 = c1; c2 < cols; ++c2) {
      double s = 0.0;
      for (int a = 0; a < rows; ++a) s += jac[a][c1] * ij[a][c2];
      m.at(c1, c2) = s;
      m.at(c2, c1) = s;
    }
  const LogDetResult ld = log_det_psd(m);
  LogPriorValue out;
  out.value = 0.5 * ld.value;
  out.scenario = Scenario::all_params();
  out.method = rc;
  out.jitter_applied = ld.clamped;
  return out;
}

}  // namespace jeffmix
