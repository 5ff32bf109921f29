#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "jeffmix/errors.hpp"
#include "jeffmix/hierarchical.hpp"
#include "jeffmix/linalg.hpp"
#include "jeffmix/math.hpp"
#include "jeffmix/mcmc.hpp"
#include "jeffmix/rng.hpp"

namespace jeffmix {

struct MarginalLikelihood {
  double log_value = 0.0;
  double mc_se = 0.0;  // from a 5-fold split of the draw sets
  int bridge_iterations = 0;
};

namespace detail {

/// Iterative optimal bridge between an unnormalized target (evaluated at
/// posterior draws) and a proposal (evaluated at its own draws), everything
/// in log space. l1/l2 are log(target/proposal) at posterior and proposal
/// draws respectively.
inline std::pair<double, int> bridge_iterate(const std::vector<double>& l1,
                                             const std::vector<double>& l2) {
  const double log_s1 = std::log(double(l1.size()) / double(l1.size() + l2.size()));
  const double log_s2 = std::log(double(l2.size()) / double(l1.size() + l2.size()));
  // start from a robust location of l2
  std::vector<double> tmp = l2;
  std::sort(tmp.begin(), tmp.end());
  double r = quantile_sorted(tmp, 0.5);
  int it = 0;
  for (; it < 500; ++it) {
    LogSumExpAccumulator num, den;
    for (double v : l2) num.add(v - log_sum_exp(log_s1 + v, log_s2 + r));
    for (double v : l1) den.add(-log_sum_exp(log_s1 + v, log_s2 + r));
    const double next = (num.value() - std::log(double(l2.size()))) -
                        (den.value() - std::log(double(l1.size())));
    if (std::abs(next - r) < 1e-10) {
      r = next;
      break;
    }
    r = next;
  }
  return {r, it + 1};
}

}  // namespace detail

/// Bridge-sampling marginal likelihood for a target given by
/// log_target(eta) on an unconstrained chart, using posterior draws already
/// mapped to that chart. The proposal is a moment-matched Gaussian fitted to
/// the draws.
inline MarginalLikelihood log_marginal_bridge(
    const std::vector<std::vector<double>>& posterior_eta,
    const std::function<double(const std::vector<double>&)>& log_target, std::uint64_t seed) {
  if (posterior_eta.size() < 50) throw parameter_domain_error("too few posterior draws");
  const int dim = static_cast<int>(posterior_eta.front().size());
  const std::size_t n = posterior_eta.size();

  // moment match
  std::vector<double> m(dim, 0.0);
  for (const auto& e : posterior_eta)
    for (int i = 0; i < dim; ++i) m[i] += e[i];
  for (double& v : m) v /= double(n);
  SymMatrix cov(dim);
  for (const auto& e : posterior_eta)
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j) cov.at(i, j) += (e[i] - m[i]) * (e[j] - m[j]);
  double trace = 0.0;
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      cov.at(i, j) /= double(n - 1);
      cov.at(j, i) = cov.at(i, j);
    }
    trace += cov.at(i, i);
  }
  std::vector<double> lower;
  double ridge = 1e-10 * std::max(trace / dim, 1e-12);
  while (!cholesky_lower(cov, lower)) {
    for (int i = 0; i < dim; ++i) cov.at(i, i) += ridge;
    ridge *= 10.0;
    if (ridge > 1e6 * trace) throw error("bridge proposal covariance is unusable");
  }
  double log_det_half = 0.0;
  for (int i = 0; i < dim; ++i)
    log_det_half += std::log(lower[static_cast<std::size_t>(i) * dim + i]);
  auto log_q = [&](const std::vector<double>& e) {
    // solve L y = (e - m), density from |y|^2
    std::vector<double> y(dim);
    for (int i = 0; i < dim; ++i) {
      double s = e[i] - m[i];
      for (int j = 0; j < i; ++j) s -= lower[static_cast<std::size_t>(i) * dim + j] * y[j];
      y[i] = s / lower[static_cast<std::size_t>(i) * dim + i];
    }
    double q = -0.5 * dim * kLog2Pi - log_det_half;
    for (double v : y) q -= 0.5 * v * v;
    return q;
  };

  // proposal draws, one per posterior draw
  Rng rng(seed);
  std::vector<std::vector<double>> proposal_eta(n, std::vector<double>(dim));
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<double> z(dim);
    for (double& v : z) v = rng.normal();
    for (int i = 0; i < dim; ++i) {
      double acc = m[i];
      for (int j = 0; j <= i; ++j) acc += lower[static_cast<std::size_t>(i) * dim + j] * z[j];
      proposal_eta[s][i] = acc;
    }
  }

  std::vector<double> l1(n), l2(n);
  for (std::size_t s = 0; s < n; ++s) {
    l1[s] = log_target(posterior_eta[s]) - log_q(posterior_eta[s]);
    l2[s] = log_target(proposal_eta[s]) - log_q(proposal_eta[s]);
    if (std::isnan(l1[s])) l1[s] = kNegInf;
    if (std::isnan(l2[s])) l2[s] = kNegInf;
  }

  MarginalLikelihood out;
  const auto [r, iters] = detail::bridge_iterate(l1, l2);
  out.log_value = r;
  out.bridge_iterations = iters;

  // 5-fold split for a Monte Carlo standard error
  const int folds = 5;
  std::vector<double> fold_est;
  for (int f = 0; f < folds; ++f) {
    std::vector<double> f1, f2;
    for (std::size_t s = f; s < n; s += folds) {
      f1.push_back(l1[s]);
      f2.push_back(l2[s]);
    }
    fold_est.push_back(detail::bridge_iterate(f1, f2).first);
  }
  out.mc_se = sample_sd(fold_est) / std::sqrt(double(folds));
  return out;
}

/// Unconstrained chart for the hierarchical model: additive log-ratio
/// weights, raw locations, log scales, mu0, log zeta0.
struct HierarchicalEta {
  int k = 0;

  int dim() const { return 3 * k + 1; }

  std::vector<double> to_eta(const MixtureParams& p, const HierarchicalHyper& h) const {
    std::vector<double> e;
    e.reserve(dim());
    const double pk = std::max(p.weights[k - 1], 1e-300);
    for (int l = 0; l < k - 1; ++l)
      e.push_back(std::log(std::max(p.weights[l], 1e-300) / pk));
    for (int l = 0; l < k; ++l) e.push_back(p.locations[l]);
    for (int l = 0; l < k; ++l) e.push_back(std::log(p.scales[l]));
    e.push_back(h.mu0);
    e.push_back(std::log(h.zeta0));
    return e;
  }

  void from_eta(const std::vector<double>& e, MixtureParams& p, HierarchicalHyper& h) const {
    p.weights.assign(k, 0.0);
    double hi = 0.0;  // log-sum-exp over (e_0..e_{k-2}, 0)
    for (int l = 0; l < k - 1; ++l) hi = std::max(hi, e[l]);
    double denom = std::exp(0.0 - hi);
    for (int l = 0; l < k - 1; ++l) denom += std::exp(e[l] - hi);
    double head = 0.0;
    for (int l = 0; l < k - 1; ++l) {
      p.weights[l] = std::exp(e[l] - hi) / denom;
      head += p.weights[l];
    }
    p.weights[k - 1] = 1.0 - head;
    p.locations.assign(k, 0.0);
    p.scales.assign(k, 0.0);
    for (int l = 0; l < k; ++l) p.locations[l] = e[k - 1 + l];
    for (int l = 0; l < k; ++l) p.scales[l] = std::exp(e[2 * k - 1 + l]);
    h.mu0 = e[3 * k - 1];
    h.zeta0 = std::exp(e[3 * k]);
  }

  /// log |d theta / d eta|: simplex Jacobian plus the log-scale factors.
  double log_jacobian(const MixtureParams& p, const HierarchicalHyper& h) const {
    double j = 0.0;
    for (int l = 0; l < k; ++l) j += std::log(std::max(p.weights[l], 1e-300));
    for (int l = 0; l < k; ++l) j += std::log(p.scales[l]);
    j += std::log(h.zeta0);
    return j;
  }
};

/// Marginal likelihood of the hierarchical mixture model by bridge sampling
/// over the trace's kept draws. The weights prior enters unnormalized and the
/// hyperprior is improper, so values are comparable only across models that
/// share this prior structure; the intended use is ratios (Bayes factors).
inline MarginalLikelihood log_marginal_hierarchical(const Dataset& data,
                                                    const ComponentFamily& family,
                                                    const ChainTrace& trace,
                                                    const IntegratorConfig& integ,
                                                    std::uint64_t seed,
                                                    std::size_t max_draws = 1000) {
  if (trace.prior_mode != PriorMode::hierarchical)
    throw parameter_domain_error("marginal likelihood expects a hierarchical-prior trace");
  const int k = trace.draws.front().params.k();
  HierarchicalEta chart{k};
  const std::size_t n = trace.kept_count();
  const std::size_t stride = std::max<std::size_t>(1, n / max_draws);
  std::vector<std::vector<double>> eta;
  for (std::size_t i = 0; i < n; i += stride)
    eta.push_back(chart.to_eta(trace.kept(i).params, trace.kept(i).hyper));

  auto log_target = [&, chart](const std::vector<double>& e) {
    MixtureParams p;
    p.family = family;
    HierarchicalHyper h;
    chart.from_eta(e, p, h);
    if (p.weights[k - 1] <= 0.0) return kNegInf;
    try {
      const double ll = log_likelihood(data, p);
      const double lp = log_hier_prior(p, h, integ);
      return ll + lp + chart.log_jacobian(p, h);
    } catch (const error&) {
      return kNegInf;
    }
  };
  return log_marginal_bridge(eta, log_target, seed);
}

}  // namespace jeffmix
