#pragma once

#include <stdexcept>
#include <string>

namespace jeffmix {

/// Base class for all jeffmix errors.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parameter values outside their domain (weights off the simplex, sigma <= 0, ...).
struct parameter_domain_error : error {
  using error::error;
};

/// Allocation vector inconsistent with the data or mixture (bad length, index out of range).
struct allocation_error : error {
  using error::error;
};

/// Enumeration guard tripped: k^n exceeds the brute-force budget.
struct instance_too_large_error : error {
  using error::error;
};

/// Adaptive quadrature failed to reach the requested tolerance.
/// Carries the best estimate available at the point of failure.
struct integration_error : error {
  integration_error(const std::string& msg, double partial_estimate)
      : error(msg), partial(partial_estimate) {}
  double partial;
};

/// Fisher matrix numerically indefinite beyond the eigenvalue jitter budget.
struct degenerate_information_error : error {
  using error::error;
};

/// Weights prior requested at a simplex boundary point where the integrand
/// degenerates; evaluate in the interior and take the limit instead.
struct boundary_evaluation_error : error {
  using error::error;
};

/// MCMC could not start: the target log posterior is -inf at the initial point.
struct initialization_error : error {
  using error::error;
};

/// Malformed CLI arguments or configuration file.
struct config_error : error {
  using error::error;
};

}  // namespace jeffmix
