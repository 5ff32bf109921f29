#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "jeffmix/errors.hpp"
#include "jeffmix/integrate.hpp"
#include "jeffmix/linalg.hpp"
#include "jeffmix/mixture.hpp"
#include "jeffmix/rng.hpp"

namespace jeffmix {

/// Which parameters are treated as unknown. This fixes the dimension and the
/// canonical ordering of the information matrix:
///   weights_only   : p_1 .. p_{k-1}                      (dim k-1)
///   locations_only : mu_1 .. mu_k                        (dim k)
///   all_params     : p_1..p_{k-1}, mu_1..mu_k, s_1..s_k  (dim 2k + k-1)
struct Scenario {
  enum class Unknowns { weights_only, locations_only, all_params };
  Unknowns unknowns = Unknowns::all_params;

  int dimension(int k) const {
    switch (unknowns) {
      case Unknowns::weights_only: return k - 1;
      case Unknowns::locations_only: return k;
      case Unknowns::all_params: return 2 * k + (k - 1);
    }
    return 0;
  }

  static Scenario weights_only() { return {Unknowns::weights_only}; }
  static Scenario locations_only() { return {Unknowns::locations_only}; }
  static Scenario all_params() { return {Unknowns::all_params}; }

  std::string name() const {
    switch (unknowns) {
      case Unknowns::weights_only: return "weights";
      case Unknowns::locations_only: return "locations";
      case Unknowns::all_params: return "all";
    }
    return "?";
  }
};

/// Resolved meaning of one ordering index.
struct ParamRef {
  enum class Block { weight, location, scale };
  Block block;
  int component;  // 0-based
};

inline ParamRef param_ref(const Scenario& sc, int k, int index) {
  switch (sc.unknowns) {
    case Scenario::Unknowns::weights_only:
      if (index < 0 || index >= k - 1) throw parameter_domain_error("weights index out of range");
      return {ParamRef::Block::weight, index};
    case Scenario::Unknowns::locations_only:
      if (index < 0 || index >= k) throw parameter_domain_error("locations index out of range");
      return {ParamRef::Block::location, index};
    case Scenario::Unknowns::all_params:
      if (index < 0 || index >= 3 * k - 1) throw parameter_domain_error("index out of range");
      if (index < k - 1) return {ParamRef::Block::weight, index};
      if (index < 2 * k - 1) return {ParamRef::Block::location, index - (k - 1)};
      return {ParamRef::Block::scale, index - (2 * k - 1)};
  }
  throw parameter_domain_error("bad scenario");
}

/// Symmetric PSD matrix of expected-information elements under the scenario's
/// ordering.
struct FisherMatrix {
  int dim = 0;
  Scenario scenario;
  SymMatrix entries;

  double at(int i, int j) const { return entries.at(i, j); }
};

/// Integration window [min_l(mu_l - m s_l), max_l(mu_l + m s_l)]; with the
/// default m = 8 the omitted component mass is below 1e-15.
struct Bounds {
  double lo, hi;
};

inline Bounds integration_bounds(const MixtureParams& params, double sigma_mult) {
  double lo = params.locations[0] - sigma_mult * params.scales[0];
  double hi = params.locations[0] + sigma_mult * params.scales[0];
  for (int l = 1; l < params.k(); ++l) {
    lo = std::min(lo, params.locations[l] - sigma_mult * params.scales[l]);
    hi = std::max(hi, params.locations[l] + sigma_mult * params.scales[l]);
  }
  return {lo, hi};
}

// Mixture densities tend to vanish between well-separated modes; score-product
// ratios there are 0/0 forms. Below this log-density the integrand is defined
// as exactly 0.
inline constexpr double kLogDensityGuard = -700.0;

namespace detail {

/// Per-component constants hoisted out of the per-point density evaluation
/// (the normalizers, including lgamma for student-t, are loop invariants).
struct CompTable {
  ComponentFamily::Kind kind;
  double df = 0.0;
  double mu = 0.0;
  double inv_sigma = 0.0;
  double log_norm = 0.0;
};

inline std::vector<CompTable> build_comp_tables(const MixtureParams& params) {
  std::vector<CompTable> t(params.k());
  for (int l = 0; l < params.k(); ++l) {
    CompTable& c = t[l];
    c.kind = params.family.kind;
    c.df = params.family.df;
    c.mu = params.locations[l];
    c.inv_sigma = 1.0 / params.scales[l];
    switch (c.kind) {
      case ComponentFamily::Kind::gaussian:
        c.log_norm = -0.5 * kLog2Pi - std::log(params.scales[l]);
        break;
      case ComponentFamily::Kind::student_t:
        c.log_norm = std::lgamma(0.5 * (c.df + 1.0)) - std::lgamma(0.5 * c.df) -
                     0.5 * std::log(c.df * 3.14159265358979323846264338328) -
                     std::log(params.scales[l]);
        break;
      case ComponentFamily::Kind::gumbel:
        c.log_norm = -std::log(params.scales[l]);
        break;
    }
  }
  return t;
}

inline double table_density(const CompTable& c, double x) {
  const double z = (x - c.mu) * c.inv_sigma;
  switch (c.kind) {
    case ComponentFamily::Kind::gaussian:
      return std::exp(c.log_norm - 0.5 * z * z);
    case ComponentFamily::Kind::student_t:
      return std::exp(c.log_norm - 0.5 * (c.df + 1.0) * std::log1p(z * z / c.df));
    case ComponentFamily::Kind::gumbel:
      return std::exp(c.log_norm - z - std::exp(-z));
  }
  return 0.0;
}

/// Per-point component densities and the mixture density.
struct PointDensities {
  std::vector<double> f;  // component densities f_l(x)
  double g = 0.0;         // mixture density
};

inline void point_densities_into(double x, const MixtureParams& params,
                                 const std::vector<CompTable>& tables, PointDensities& pd) {
  const int k = params.k();
  pd.f.resize(k);
  pd.g = 0.0;
  for (int l = 0; l < k; ++l) {
    pd.f[l] = table_density(tables[l], x);
    pd.g += params.weights[l] * pd.f[l];
  }
}

inline PointDensities point_densities(double x, const MixtureParams& params) {
  PointDensities pd;
  point_densities_into(x, params, build_comp_tables(params), pd);
  return pd;
}

/// dg/dtheta_i at x given precomputed component densities.
inline double partial_density(double x, const MixtureParams& params, const ParamRef& ref,
                              const PointDensities& pd) {
  switch (ref.block) {
    case ParamRef::Block::weight:
      // chart p_1..p_{k-1} with p_k the complement
      return pd.f[ref.component] - pd.f[params.k() - 1];
    case ParamRef::Block::location:
      return params.weights[ref.component] * pd.f[ref.component] *
             family_score_location(params.family, x, params.locations[ref.component],
                                   params.scales[ref.component]);
    case ParamRef::Block::scale:
      return params.weights[ref.component] * pd.f[ref.component] *
             family_score_scale(params.family, x, params.locations[ref.component],
                                params.scales[ref.component]);
  }
  return 0.0;
}

}  // namespace detail

/// Score-product integrand of one information element:
///   (dg/dtheta_i)(dg/dtheta_j) / g   at x,
/// defined as 0 where the mixture density underflows (log g < -700).
inline double integrand(double x, const MixtureParams& params, const Scenario& scenario, int i,
                        int j) {
  params.validate();
  const int k = params.k();
  const ParamRef ri = param_ref(scenario, k, i);
  const ParamRef rj = param_ref(scenario, k, j);
  const auto pd = detail::point_densities(x, params);
  if (!(pd.g > 0.0) || std::log(pd.g) < kLogDensityGuard) return 0.0;
  const double di = detail::partial_density(x, params, ri, pd);
  const double dj = detail::partial_density(x, params, rj, pd);
  return di * dj / pd.g;
}

/// Resolve an auto_select method by the small-sigma rule: riemann when the
/// smallest component scale is at or above the switch threshold, monte_carlo
/// below it (boundary inclusive on the riemann side). Explicit methods pass
/// through untouched.
inline IntegratorConfig select_integrator(const MixtureParams& params,
                                          const IntegratorConfig& cfg) {
  IntegratorConfig resolved = cfg;
  if (cfg.method != IntegratorMethod::auto_select) return resolved;
  double min_sigma = params.scales[0];
  for (double s : params.scales) min_sigma = std::min(min_sigma, s);
  resolved.method = (min_sigma >= cfg.sigma_switch_threshold) ? IntegratorMethod::riemann
                                                              : IntegratorMethod::monte_carlo;
  return resolved;
}

/// One element of the expected Fisher information matrix.
/// Deterministic for riemann and gauss_kronrod; deterministic given the seed
/// for monte_carlo, whose per-element stream is derived from (seed, i, j)
/// symmetrically so (i,j) and (j,i) agree by construction.
inline double fim_element(const MixtureParams& params, const Scenario& scenario, int i, int j,
                          const IntegratorConfig& cfg) {
  params.validate();
  const IntegratorConfig rc = select_integrator(params, cfg);
  const Bounds b = integration_bounds(params, rc.bounds_sigma_mult);
  auto f = [&](double x) { return integrand(x, params, scenario, i, j); };
  switch (rc.method) {
    case IntegratorMethod::riemann:
      return riemann_midpoint(f, b.lo, b.hi, rc.riemann_points);
    case IntegratorMethod::gauss_kronrod:
      return gauss_kronrod_or_throw(f, b.lo, b.hi, rc.gk_rel_tol, rc.gk_max_subdivisions,
                                    "fim element (" + std::to_string(i) + "," +
                                        std::to_string(j) + ")",
                                    rc.gk_abs_tol);
    case IntegratorMethod::monte_carlo: {
      // Importance sampling from the mixture itself: the integral becomes
      // E_g[(dg_i dg_j) / g^2], whose integrand is bounded on the weights chart.
      const int k = params.k();
      const ParamRef ri = param_ref(scenario, k, i);
      const ParamRef rj = param_ref(scenario, k, j);
      Rng rng(Rng::derive(rc.seed, static_cast<std::uint64_t>(std::min(i, j)),
                          static_cast<std::uint64_t>(std::max(i, j))));
      const auto tables = detail::build_comp_tables(params);
      double sum = 0.0;
      detail::PointDensities pd;
      for (int s = 0; s < rc.mc_samples; ++s) {
        const int l = rng.categorical(params.weights);
        const double x =
            family_sample(params.family, params.locations[l], params.scales[l], rng);
        detail::point_densities_into(x, params, tables, pd);
        if (!(pd.g > 0.0) || std::log(pd.g) < kLogDensityGuard) continue;
        const double di = detail::partial_density(x, params, ri, pd);
        const double dj = detail::partial_density(x, params, rj, pd);
        sum += di * dj / (pd.g * pd.g);
      }
      return sum / rc.mc_samples;
    }
    case IntegratorMethod::auto_select: break;  // resolved above
  }
  throw parameter_domain_error("unresolved integrator method");
}

namespace detail {

/// Shared-sweep riemann evaluation of every element: one pass over the grid,
/// component densities computed once per point. Per element this accumulates
/// exactly the same terms in the same order as fim_element, so the results
/// are bit-identical to the elementwise path.
inline SymMatrix fim_riemann_all(const MixtureParams& params, const Scenario& scenario,
                                 const IntegratorConfig& cfg) {
  const int k = params.k();
  const int dim = scenario.dimension(k);
  std::vector<ParamRef> refs;
  refs.reserve(dim);
  for (int i = 0; i < dim; ++i) refs.push_back(param_ref(scenario, k, i));
  const Bounds b = integration_bounds(params, cfg.bounds_sigma_mult);
  const double h = (b.hi - b.lo) / cfg.riemann_points;
  SymMatrix m(dim);
  std::vector<double> d(dim);
  const auto tables = build_comp_tables(params);
  PointDensities pd;
  for (int t = 0; t < cfg.riemann_points; ++t) {
    const double x = b.lo + (t + 0.5) * h;
    point_densities_into(x, params, tables, pd);
    if (!(pd.g > 0.0) || std::log(pd.g) < kLogDensityGuard) continue;
    for (int i = 0; i < dim; ++i) d[i] = partial_density(x, params, refs[i], pd);
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j) m.at(i, j) += d[i] * d[j] / pd.g;
  }
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) {
      m.at(i, j) *= h;
      m.at(j, i) = m.at(i, j);
    }
  return m;
}

/// Shared-sample Monte Carlo evaluation of the whole matrix: mc_samples
/// importance draws from the mixture, every element accumulated on the same
/// draw. One stream per matrix (seeded by cfg.seed); element errors are
/// correlated but the cost is O(samples) instead of O(samples * b^2).
inline SymMatrix fim_monte_carlo_all(const MixtureParams& params, const Scenario& scenario,
                                     const IntegratorConfig& cfg) {
  const int k = params.k();
  const int dim = scenario.dimension(k);
  std::vector<ParamRef> refs;
  refs.reserve(dim);
  for (int i = 0; i < dim; ++i) refs.push_back(param_ref(scenario, k, i));
  const auto tables = build_comp_tables(params);
  Rng rng(cfg.seed);
  SymMatrix m(dim);
  std::vector<double> d(dim);
  PointDensities pd;
  for (int s = 0; s < cfg.mc_samples; ++s) {
    const int l = rng.categorical(params.weights);
    const double x = family_sample(params.family, params.locations[l], params.scales[l], rng);
    point_densities_into(x, params, tables, pd);
    if (!(pd.g > 0.0) || std::log(pd.g) < kLogDensityGuard) continue;
    const double g2 = pd.g * pd.g;
    for (int i = 0; i < dim; ++i) d[i] = partial_density(x, params, refs[i], pd);
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j) m.at(i, j) += d[i] * d[j] / g2;
  }
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) {
      m.at(i, j) /= cfg.mc_samples;
      m.at(j, i) = m.at(i, j);
    }
  return m;
}

}  // namespace detail

/// Full expected Fisher information matrix under the scenario, symmetrized
/// by mirroring the upper triangle. Riemann runs as one shared sweep over the
/// grid and monte_carlo as one shared sample set (deterministic given
/// cfg.seed); gauss_kronrod integrates element by element. Standalone
/// fim_element calls keep their own per-element monte-carlo streams.
inline FisherMatrix fim(const MixtureParams& params, const Scenario& scenario,
                        const IntegratorConfig& cfg) {
  params.validate();
  const IntegratorConfig rc = select_integrator(params, cfg);
  const int dim = scenario.dimension(params.k());
  FisherMatrix out;
  out.dim = dim;
  out.scenario = scenario;
  if (dim == 0) {
    out.entries = SymMatrix(0);
    return out;
  }
  if (rc.method == IntegratorMethod::riemann) {
    out.entries = detail::fim_riemann_all(params, scenario, rc);
    return out;
  }
  if (rc.method == IntegratorMethod::monte_carlo) {
    out.entries = detail::fim_monte_carlo_all(params, scenario, rc);
    return out;
  }
  out.entries = SymMatrix(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) {
      double v;
      try {
        v = fim_element(params, scenario, i, j, rc);
      } catch (const integration_error& e) {
        throw integration_error("fim element (" + std::to_string(i) + "," + std::to_string(j) +
                                    "): " + e.what(),
                                e.partial);
      }
      out.entries.at(i, j) = v;
      out.entries.at(j, i) = v;
    }
  return out;
}

/// One mixture component with its own family; only the weights-chart
/// information needs this heterogeneous form (the prior-shape studies mix
/// gaussian and student-t components).
struct ComponentSpec {
  ComponentFamily family;
  double location = 0.0;
  double scale = 1.0;
};

inline Bounds integration_bounds(const std::vector<ComponentSpec>& comps, double sigma_mult) {
  double lo = comps[0].location - sigma_mult * comps[0].scale;
  double hi = comps[0].location + sigma_mult * comps[0].scale;
  for (const auto& c : comps) {
    lo = std::min(lo, c.location - sigma_mult * c.scale);
    hi = std::max(hi, c.location + sigma_mult * c.scale);
  }
  return {lo, hi};
}

/// Weights-chart information matrix for components of mixed families:
/// elements are integrals of (f_i - f_k)(f_j - f_k) / g.
inline SymMatrix weights_fim_hetero(const std::vector<double>& weights,
                                    const std::vector<ComponentSpec>& comps,
                                    const IntegratorConfig& cfg) {
  const int k = static_cast<int>(comps.size());
  if (static_cast<int>(weights.size()) != k)
    throw parameter_domain_error("weights/components size mismatch");
  for (const auto& c : comps) {
    c.family.validate();
    if (!(c.scale > 0.0)) throw parameter_domain_error("component scale must be positive");
  }
  const int dim = k - 1;
  SymMatrix m(dim);
  if (dim == 0) return m;
  std::vector<double> f(k);
  auto densities_at = [&](double x) {
    double g = 0.0;
    for (int l = 0; l < k; ++l) {
      f[l] = std::exp(family_log_pdf(comps[l].family, x, comps[l].location, comps[l].scale));
      g += weights[l] * f[l];
    }
    return g;
  };
  IntegratorConfig rc = cfg;
  if (rc.method == IntegratorMethod::auto_select) {
    double min_sigma = comps[0].scale;
    for (const auto& c : comps) min_sigma = std::min(min_sigma, c.scale);
    rc.method = (min_sigma >= cfg.sigma_switch_threshold) ? IntegratorMethod::riemann
                                                          : IntegratorMethod::monte_carlo;
  }
  const Bounds b = integration_bounds(comps, rc.bounds_sigma_mult);
  switch (rc.method) {
    case IntegratorMethod::riemann: {
      const double h = (b.hi - b.lo) / rc.riemann_points;
      for (int t = 0; t < rc.riemann_points; ++t) {
        const double g = densities_at(b.lo + (t + 0.5) * h);
        if (!(g > 0.0) || std::log(g) < kLogDensityGuard) continue;
        for (int i = 0; i < dim; ++i)
          for (int j = i; j < dim; ++j)
            m.at(i, j) += (f[i] - f[k - 1]) * (f[j] - f[k - 1]) / g;
      }
      for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) {
          m.at(i, j) *= h;
          m.at(j, i) = m.at(i, j);
        }
      return m;
    }
    case IntegratorMethod::gauss_kronrod: {
      for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) {
          auto fn = [&](double x) {
            const double g = densities_at(x);
            if (!(g > 0.0) || std::log(g) < kLogDensityGuard) return 0.0;
            return (f[i] - f[k - 1]) * (f[j] - f[k - 1]) / g;
          };
          const double v = gauss_kronrod_or_throw(fn, b.lo, b.hi, rc.gk_rel_tol,
                                                  rc.gk_max_subdivisions, "weights fim",
                                                  rc.gk_abs_tol);
          m.at(i, j) = v;
          m.at(j, i) = v;
        }
      return m;
    }
    case IntegratorMethod::monte_carlo: {
      for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) {
          Rng rng(Rng::derive(rc.seed, static_cast<std::uint64_t>(i),
                              static_cast<std::uint64_t>(j)));
          double sum = 0.0;
          for (int s = 0; s < rc.mc_samples; ++s) {
            const int l = rng.categorical(weights);
            const double x =
                family_sample(comps[l].family, comps[l].location, comps[l].scale, rng);
            const double g = densities_at(x);
            if (!(g > 0.0) || std::log(g) < kLogDensityGuard) continue;
            sum += (f[i] - f[k - 1]) * (f[j] - f[k - 1]) / (g * g);
          }
          m.at(i, j) = sum / rc.mc_samples;
          m.at(j, i) = m.at(i, j);
        }
      return m;
    }
    case IntegratorMethod::auto_select: break;
  }
  throw parameter_domain_error("unresolved integrator method");
}

/// Closed-form single-Gaussian information: diag(1/s^2, 2/s^2) under the
/// ordering (location, scale). Validation oracle for the numeric path.
inline FisherMatrix analytic_fim_gaussian_single(double /*mu*/, double sigma) {
  if (!(sigma > 0.0)) throw parameter_domain_error("sigma must be positive");
  FisherMatrix out;
  out.dim = 2;
  out.scenario = Scenario::all_params();
  out.entries = SymMatrix(2);
  out.entries.at(0, 0) = 1.0 / (sigma * sigma);
  out.entries.at(1, 1) = 2.0 / (sigma * sigma);
  return out;
}

}  // namespace jeffmix
