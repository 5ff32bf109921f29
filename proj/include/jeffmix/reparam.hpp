#pragma once

#include <cmath>
#include <vector>

#include "jeffmix/errors.hpp"
#include "jeffmix/mixture.hpp"

namespace jeffmix {

/// Reference-component parametrization. Component 1 carries the global
/// location mu and scale tau = sigma_1; each later component is written
/// relative to its predecessor:
///   sigma_l = sigma_{l-1} * ratio_l,   mu_l = mu_{l-1} + sigma_{l-1} * delta_l.
/// Weights are stick-breaking: p_1 = sticks[0], then each stick takes its
/// fraction of what is left.
struct ReparamParams {
  double mu = 0.0;
  double tau = 1.0;
  std::vector<double> deltas;        // components 2..k
  std::vector<double> scale_ratios;  // components 2..k
  std::vector<double> sticks;        // size k-1, each in [0,1]

  int k() const { return static_cast<int>(deltas.size()) + 1; }

  void validate() const {
    if (!(tau > 0.0)) throw parameter_domain_error("reference scale tau must be positive");
    if (scale_ratios.size() != deltas.size())
      throw parameter_domain_error("deltas/scale_ratios sizes differ");
    if (sticks.size() != deltas.size())
      throw parameter_domain_error("sticks size must be k-1");
    for (double r : scale_ratios)
      if (!(r > 0.0)) throw parameter_domain_error("scale ratio must be positive");
    for (double s : sticks)
      if (!(s >= 0.0 && s <= 1.0))
        throw parameter_domain_error("stick weight outside [0,1]");
  }
};

inline std::vector<double> sticks_to_weights(const std::vector<double>& sticks) {
  const int k = static_cast<int>(sticks.size()) + 1;
  std::vector<double> p(k);
  double remaining = 1.0;
  for (int j = 0; j < k - 1; ++j) {
    p[j] = remaining * sticks[j];
    remaining *= (1.0 - sticks[j]);
  }
  p[k - 1] = remaining;
  return p;
}

inline std::vector<double> weights_to_sticks(const std::vector<double>& p) {
  const int k = static_cast<int>(p.size());
  std::vector<double> sticks(k - 1);
  double remaining = 1.0;
  for (int j = 0; j < k - 1; ++j) {
    sticks[j] = remaining > 0.0 ? p[j] / remaining : 0.0;
    sticks[j] = std::min(std::max(sticks[j], 0.0), 1.0);
    remaining -= p[j];
  }
  return sticks;
}

inline ReparamParams to_reparam(const MixtureParams& params) {
  params.validate();
  ReparamParams r;
  r.mu = params.locations[0];
  r.tau = params.scales[0];
  const int k = params.k();
  r.deltas.resize(k - 1);
  r.scale_ratios.resize(k - 1);
  for (int l = 1; l < k; ++l) {
    r.deltas[l - 1] = (params.locations[l] - params.locations[l - 1]) / params.scales[l - 1];
    r.scale_ratios[l - 1] = params.scales[l] / params.scales[l - 1];
  }
  r.sticks = weights_to_sticks(params.weights);
  return r;
}

inline MixtureParams from_reparam(const ReparamParams& r, const ComponentFamily& family) {
  r.validate();
  const int k = r.k();
  MixtureParams p;
  p.family = family;
  p.weights = sticks_to_weights(r.sticks);
  p.locations.resize(k);
  p.scales.resize(k);
  p.locations[0] = r.mu;
  p.scales[0] = r.tau;
  for (int l = 1; l < k; ++l) {
    p.locations[l] = p.locations[l - 1] + p.scales[l - 1] * r.deltas[l - 1];
    p.scales[l] = p.scales[l - 1] * r.scale_ratios[l - 1];
  }
  return p;
}

/// log |det d(natural)/d(reparam)| for the full chart change, weights block
/// included. The location-scale block is triangular in the order
/// (mu, tau, delta_2, ratio_2, ...) with diagonal (1, 1, sigma_1, sigma_1,
/// sigma_2, sigma_2, ...); the weights block is triangular with diagonal
/// equal to the remaining stick mass.
inline double log_abs_det_reparam_jacobian(const ReparamParams& r) {
  r.validate();
  const int k = r.k();
  double logdet = 0.0;
  double remaining = 1.0;
  for (int j = 0; j < k - 1; ++j) {
    if (remaining <= 0.0)
      throw parameter_domain_error("degenerate stick weights: no mass remaining");
    logdet += std::log(remaining);
    remaining *= (1.0 - r.sticks[j]);
  }
  double sd = r.tau;
  for (int l = 1; l < k; ++l) {
    logdet += 2.0 * std::log(sd);
    sd *= r.scale_ratios[l - 1];
  }
  return logdet;
}

}  // namespace jeffmix
