#pragma once

#include <cmath>

#include "jeffmix/errors.hpp"
#include "jeffmix/jeffreys.hpp"
#include "jeffmix/math.hpp"
#include "jeffmix/mixture.hpp"

namespace jeffmix {

/// Second-level hyperparameters: common location mu0 and spread zeta0 (zeta0
/// acts as the standard deviation of the location level and the threshold of
/// the scale level).
struct HierarchicalHyper {
  double mu0 = 0.0;
  double zeta0 = 1.0;

  void validate() const {
    if (!(zeta0 > 0.0)) throw parameter_domain_error("zeta0 must be positive");
  }
};

/// Normalized scale-level density: (1/(2 zeta0)) on (0, zeta0) and
/// (zeta0 / (2 sigma^2)) on (zeta0, inf); the two halves meet at sigma = zeta0
/// and each carries mass 1/2.
inline double log_sigma_prior(double sigma, double zeta0) {
  if (!(sigma > 0.0)) throw parameter_domain_error("sigma must be positive");
  if (!(zeta0 > 0.0)) throw parameter_domain_error("zeta0 must be positive");
  if (sigma <= zeta0) return -std::log(2.0 * zeta0);
  return std::log(0.5 * zeta0) - 2.0 * std::log(sigma);
}

/// Location level: Normal(mu0, zeta0^2), zeta0 the standard deviation.
inline double log_mu_prior(double mu, double mu0, double zeta0) {
  if (!(zeta0 > 0.0)) throw parameter_domain_error("zeta0 must be positive");
  const double z = (mu - mu0) / zeta0;
  return -0.5 * kLog2Pi - std::log(zeta0) - 0.5 * z * z;
}

/// Top level: improper 1/zeta0, flat in mu0. Unnormalized.
inline double log_hyperprior(double /*mu0*/, double zeta0) {
  if (!(zeta0 > 0.0)) throw parameter_domain_error("zeta0 must be positive");
  return -std::log(zeta0);
}

/// Composed hierarchical log prior: i.i.d. location and scale levels, the
/// conditional Jeffreys prior on the weights, and the hyperprior.
inline double log_hier_prior(const MixtureParams& params, const HierarchicalHyper& hyper,
                             const IntegratorConfig& cfg) {
  params.validate();
  hyper.validate();
  double out = log_hyperprior(hyper.mu0, hyper.zeta0);
  for (int l = 0; l < params.k(); ++l) {
    out += log_mu_prior(params.locations[l], hyper.mu0, hyper.zeta0);
    out += log_sigma_prior(params.scales[l], hyper.zeta0);
  }
  out += log_jeffreys_weights(params.weights, params, cfg).value;
  return out;
}

}  // namespace jeffmix
