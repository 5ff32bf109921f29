#pragma once

#include <cmath>
#include <string>

#include "jeffmix/errors.hpp"
#include "jeffmix/math.hpp"
#include "jeffmix/rng.hpp"

namespace jeffmix {

/// Location-scale component family. Student-t carries a fixed df (it is a
/// study parameter, never inferred). Gumbel uses the maximum (right-skewed)
/// convention: density (1/s) exp(-(z + e^{-z})) with z = (x-m)/s.
struct ComponentFamily {
  enum class Kind { gaussian, student_t, gumbel };

  Kind kind = Kind::gaussian;
  double df = 0.0;  // student_t only

  static ComponentFamily gaussian() { return {Kind::gaussian, 0.0}; }
  static ComponentFamily student(double df) { return {Kind::student_t, df}; }
  static ComponentFamily gumbel() { return {Kind::gumbel, 0.0}; }

  void validate() const {
    if (kind == Kind::student_t && !(df > 0.0))
      throw parameter_domain_error("student_t family requires df > 0");
  }

  std::string name() const {
    switch (kind) {
      case Kind::gaussian: return "gaussian";
      case Kind::student_t: return "student_t(" + std::to_string(df) + ")";
      case Kind::gumbel: return "gumbel";
    }
    return "?";
  }
};

/// log f(x | mu, sigma) for one component.
inline double family_log_pdf(const ComponentFamily& fam, double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  switch (fam.kind) {
    case ComponentFamily::Kind::gaussian:
      return -0.5 * kLog2Pi - std::log(sigma) - 0.5 * z * z;
    case ComponentFamily::Kind::student_t: {
      const double v = fam.df;
      const double c = std::lgamma(0.5 * (v + 1.0)) - std::lgamma(0.5 * v) -
                       0.5 * std::log(v * 3.14159265358979323846264338328);
      return c - std::log(sigma) - 0.5 * (v + 1.0) * std::log1p(z * z / v);
    }
    case ComponentFamily::Kind::gumbel:
      return -std::log(sigma) - z - std::exp(-z);
  }
  return kNegInf;
}

/// d/dmu log f(x | mu, sigma); closed form per family.
inline double family_score_location(const ComponentFamily& fam, double x, double mu,
                                    double sigma) {
  const double z = (x - mu) / sigma;
  switch (fam.kind) {
    case ComponentFamily::Kind::gaussian:
      return z / sigma;
    case ComponentFamily::Kind::student_t: {
      const double v = fam.df;
      return (v + 1.0) * z / (sigma * v * (1.0 + z * z / v));
    }
    case ComponentFamily::Kind::gumbel:
      return (1.0 - std::exp(-z)) / sigma;
  }
  return 0.0;
}

/// d/dsigma log f(x | mu, sigma); closed form per family.
inline double family_score_scale(const ComponentFamily& fam, double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  switch (fam.kind) {
    case ComponentFamily::Kind::gaussian:
      return (z * z - 1.0) / sigma;
    case ComponentFamily::Kind::student_t: {
      const double v = fam.df;
      return -1.0 / sigma + (v + 1.0) * z * z / (sigma * v * (1.0 + z * z / v));
    }
    case ComponentFamily::Kind::gumbel:
      return (-1.0 + z * (1.0 - std::exp(-z))) / sigma;
  }
  return 0.0;
}

inline double family_sample(const ComponentFamily& fam, double mu, double sigma, Rng& rng) {
  switch (fam.kind) {
    case ComponentFamily::Kind::gaussian: return mu + sigma * rng.normal();
    case ComponentFamily::Kind::student_t: return mu + sigma * rng.student_t(fam.df);
    case ComponentFamily::Kind::gumbel: return mu + sigma * rng.gumbel();
  }
  return mu;
}

}  // namespace jeffmix
