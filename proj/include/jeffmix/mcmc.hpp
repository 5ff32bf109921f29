#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "jeffmix/errors.hpp"
#include "jeffmix/hierarchical.hpp"
#include "jeffmix/jeffreys.hpp"
#include "jeffmix/mixture.hpp"
#include "jeffmix/reparam.hpp"
#include "jeffmix/rng.hpp"

namespace jeffmix {

/// Prior placed on the mixture parameters.
///   hierarchical       : Normal location level + two-piece scale level +
///                        conditional Jeffreys weights + 1/zeta0 hyperprior
///   full_jeffreys      : quadrature Jeffreys prior on all parameters
///   cond_sigma_proper  : proper two-piece prior on the scale ratios, Jeffreys
///                        on the remaining reparametrized coordinates
enum class PriorMode { hierarchical, full_jeffreys, cond_sigma_proper };

inline std::string prior_mode_name(PriorMode m) {
  switch (m) {
    case PriorMode::hierarchical: return "hierarchical";
    case PriorMode::full_jeffreys: return "full-jeffreys";
    case PriorMode::cond_sigma_proper: return "cond-sigma-proper";
  }
  return "?";
}

struct DivergenceThresholds {
  double sigma_stuck_eps = 0.0;   // <= 0: resolve to 1e-3 * data sd
  int stuck_run_length = 500;
  double mu_diverge_mult = 10.0;  // x data range
  /// Consecutive iterations a location must stay beyond the limit to count
  /// as diverged. 1 flags any single excursion; studies may raise it to
  /// separate drift from heavy-tail excursions.
  int diverge_run_length = 1;

  void validate() const {
    if (stuck_run_length <= 0 || diverge_run_length <= 0 || !(mu_diverge_mult > 0.0))
      throw parameter_domain_error("divergence thresholds must be positive");
  }
};

/// Initial proposal kernel scales, one per block; non-positive entries are
/// resolved from the data at chain start.
struct KernelScales {
  double weights = 0.0;
  double locations = 0.0;
  double scales = 0.0;
  double hyper = 0.0;
};

struct McmcConfig {
  int iterations = 20000;
  int burn_in = 5000;
  int adaptation_window = 100;
  double target_accept_low = 0.20;
  double target_accept_high = 0.40;
  KernelScales initial_scales;
  /// One adapted scale per block (the documented policy). Per-coordinate
  /// adaptation is available for experimentation but smears the sorted-weight
  /// summaries on overfitted fits, so it is off by default.
  bool per_coordinate_scales = false;
  PriorMode prior_mode = PriorMode::hierarchical;
  DivergenceThresholds thresholds;
  std::uint64_t seed = 1;
  IntegratorConfig integrator;

  void validate() const {
    if (iterations <= 0) throw parameter_domain_error("iterations must be positive");
    if (burn_in < 0 || burn_in >= iterations)
      throw parameter_domain_error("burn_in must lie in [0, iterations)");
    if (adaptation_window <= 0) throw parameter_domain_error("adaptation_window must be positive");
    if (!(target_accept_low > 0.0) || !(target_accept_high < 1.0) ||
        !(target_accept_low < target_accept_high))
      throw parameter_domain_error("bad target acceptance band");
    thresholds.validate();
  }
};

enum class Block : int { weights = 0, locations = 1, scales = 2, hyper = 3 };
inline constexpr int kNumBlocks = 4;
inline const char* block_name(int b) {
  static const char* names[kNumBlocks] = {"weights", "locations", "scales", "hyper"};
  return names[b];
}

struct BlockStats {
  long proposals = 0;
  long accepts = 0;
  double rate() const { return proposals > 0 ? double(accepts) / double(proposals) : 0.0; }
};

struct ScaleSnapshot {
  int iteration = 0;
  std::array<double, kNumBlocks> scales{};
};

struct Draw {
  MixtureParams params;
  HierarchicalHyper hyper;  // meaningful in hierarchical mode only
};

struct ChainTrace {
  std::vector<Draw> draws;  // one per iteration, burn-in included
  int burn_in = 0;
  PriorMode prior_mode = PriorMode::hierarchical;
  std::array<BlockStats, kNumBlocks> block_stats{};         // post burn-in
  std::array<BlockStats, kNumBlocks> burnin_block_stats{};  // during burn-in
  std::vector<ScaleSnapshot> scale_history;
  std::array<double, kNumBlocks> final_scales{};
  bool stuck = false;
  bool diverged = false;
  // data summaries used to resolve diagnostic thresholds
  double data_mean = 0.0, data_sd = 0.0, data_range = 0.0;

  std::size_t kept_count() const { return draws.size() - static_cast<std::size_t>(burn_in); }
  const Draw& kept(std::size_t i) const { return draws[static_cast<std::size_t>(burn_in) + i]; }
};

struct DiagnosticsReport {
  bool stuck = false;
  bool diverged = false;
  double sigma_below_eps_fraction = 0.0;  // over (iteration, component) pairs
  double mu_beyond_fraction = 0.0;
  double resolved_sigma_eps = 0.0;
  double resolved_mu_limit = 0.0;
  std::array<double, kNumBlocks> block_acceptance{};
};

/// Burn-in kernel adaptation: grow when the windowed acceptance exceeds the
/// band, shrink below it, leave it alone inside. Floored so repeated
/// shrinking cannot reach zero.
inline double adapt_scales(double block_acceptance, double scale, double low = 0.20,
                           double high = 0.40) {
  if (block_acceptance > high) return scale * 1.3;
  if (block_acceptance < low) return std::max(scale * 0.75, 1e-8);
  return scale;
}

namespace detail {
inline double log_truncnorm_mass(double center, double sd) {
  return log_normal_interval_mass((0.0 - center) / sd, (1.0 - center) / sd);
}
}  // namespace detail

struct WeightsProposal {
  std::vector<double> weights;
  double log_correction = 0.0;  // log q(old|new) - log q(new|old)
  bool valid = true;
};

/// Truncated-normal kernel on the first k-1 weights, complement closure on
/// the last; a negative complement invalidates the proposal before the
/// acceptance step. The correction carries the truncation normalizers (the
/// kernel is asymmetric near the edges of [0,1]).
inline WeightsProposal propose_weights(const std::vector<double>& p, double scale, Rng& rng) {
  WeightsProposal out;
  out.weights = p;
  const int k = static_cast<int>(p.size());
  if (k <= 1) return out;
  double sum = 0.0;
  for (int j = 0; j < k - 1; ++j) {
    const double y = rng.truncated_normal(p[j], scale, 0.0, 1.0);
    out.log_correction += detail::log_truncnorm_mass(p[j], scale) -
                          detail::log_truncnorm_mass(y, scale);
    out.weights[j] = y;
    sum += y;
  }
  out.weights[k - 1] = 1.0 - sum;
  if (out.weights[k - 1] < 0.0) out.valid = false;
  return out;
}

/// Per-draw relabeling: components sorted by weight descending, ties broken
/// by ascending location. Idempotent; summaries are computed after this.
inline ChainTrace relabel(ChainTrace trace) {
  for (Draw& d : trace.draws) {
    const int k = d.params.k();
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (d.params.weights[a] != d.params.weights[b])
        return d.params.weights[a] > d.params.weights[b];
      return d.params.locations[a] < d.params.locations[b];
    });
    MixtureParams np = d.params;
    for (int i = 0; i < k; ++i) {
      np.weights[i] = d.params.weights[order[i]];
      np.locations[i] = d.params.locations[order[i]];
      np.scales[i] = d.params.scales[order[i]];
    }
    d.params = std::move(np);
  }
  return trace;
}

/// Stuck/diverged flags over the full stored history: stuck means some
/// component's scale stays below eps for stuck_run_length consecutive
/// iterations; diverged means some |mu| exceeds mu_diverge_mult x data range.
inline DiagnosticsReport diagnose(const ChainTrace& trace, DivergenceThresholds thresholds) {
  if (trace.draws.empty()) throw parameter_domain_error("empty trace");
  thresholds.validate();
  DiagnosticsReport rep;
  rep.resolved_sigma_eps = thresholds.sigma_stuck_eps > 0.0 ? thresholds.sigma_stuck_eps
                                                            : 1e-3 * trace.data_sd;
  rep.resolved_mu_limit = thresholds.mu_diverge_mult * trace.data_range;
  const int k = trace.draws.front().params.k();
  const std::size_t n_iter = trace.draws.size();
  std::vector<int> run(k, 0), mu_run(k, 0);
  std::size_t below = 0, beyond = 0;
  for (const Draw& d : trace.draws) {
    for (int l = 0; l < k; ++l) {
      if (d.params.scales[l] < rep.resolved_sigma_eps) {
        ++below;
        if (++run[l] >= thresholds.stuck_run_length) rep.stuck = true;
      } else {
        run[l] = 0;
      }
      if (std::abs(d.params.locations[l]) > rep.resolved_mu_limit) {
        ++beyond;
        if (++mu_run[l] >= thresholds.diverge_run_length) rep.diverged = true;
      } else {
        mu_run[l] = 0;
      }
    }
  }
  rep.sigma_below_eps_fraction = double(below) / double(n_iter * k);
  rep.mu_beyond_fraction = double(beyond) / double(n_iter * k);
  for (int b = 0; b < kNumBlocks; ++b) rep.block_acceptance[b] = trace.block_stats[b].rate();
  return rep;
}

namespace detail {

// Scale proposals below this are auto-rejected; it only matters to chains
// already deep in the stuck regime, where it prevents FP overflow in the
// information integrals.
inline constexpr double kScaleProposalFloor = 1e-100;

/// Per-observation per-component log density cache; totals are log-sum-exp
/// over components.
class LoglikCache {
 public:
  void init(const Dataset& data, const MixtureParams& params) {
    x_ = &data.values;
    fam_ = params.family;
    k_ = params.k();
    logf_.assign(x_->size() * static_cast<std::size_t>(k_), 0.0);
    for (int l = 0; l < k_; ++l) refresh(l, params.locations[l], params.scales[l]);
  }

  void refresh(int l, double mu, double sigma) {
    const std::size_t n = x_->size();
    double* col = logf_.data() + static_cast<std::size_t>(l) * n;
    for (std::size_t i = 0; i < n; ++i) col[i] = family_log_pdf(fam_, (*x_)[i], mu, sigma);
  }

  double total(const std::vector<double>& weights) const {
    const std::size_t n = x_->size();
    logw_.resize(k_);
    std::vector<double>& logw = logw_;
    for (int l = 0; l < k_; ++l)
      logw[l] = weights[l] > 0.0 ? std::log(weights[l]) : kNegInf;
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double hi = kNegInf;
      for (int l = 0; l < k_; ++l)
        hi = std::max(hi, logw[l] + logf_[static_cast<std::size_t>(l) * n + i]);
      if (hi == kNegInf) return kNegInf;
      double s = 0.0;
      for (int l = 0; l < k_; ++l)
        s += std::exp(logw[l] + logf_[static_cast<std::size_t>(l) * n + i] - hi);
      ll += hi + std::log(s);
    }
    return ll;
  }

 private:
  const std::vector<double>* x_ = nullptr;
  ComponentFamily fam_;
  int k_ = 0;
  std::vector<double> logf_;
  mutable std::vector<double> logw_;
};

inline double safe_prior(const std::function<double()>& eval) {
  try {
    const double v = eval();
    return std::isnan(v) ? kNegInf : v;
  } catch (const degenerate_information_error&) {
    return kNegInf;
  } catch (const boundary_evaluation_error&) {
    return kNegInf;
  } catch (const integration_error& e) {
    return std::isnan(e.partial) ? kNegInf : e.partial;  // best effort, never aborts a chain
  }
}

/// One proposal-kernel scale with its adaptation window counters.
struct AdaptiveScale {
  double value = 0.1;
  long proposals = 0;
  long accepts = 0;

  void bump(bool accepted) {
    ++proposals;
    if (accepted) ++accepts;
  }
  void adapt(double lo, double hi) {
    if (proposals == 0) return;
    value = adapt_scales(double(accepts) / double(proposals), value, lo, hi);
    proposals = 0;
    accepts = 0;
  }
};

inline double geometric_mean_scale(const std::vector<AdaptiveScale>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (const auto& a : v) s += std::log(a.value);
  return std::exp(s / double(v.size()));
}

}  // namespace detail

/// Adaptive Metropolis-within-Gibbs over (weights | locations | scales |
/// hyper) blocks: truncated-normal kernels for the weights, normal for the
/// locations, log-normal for the scales, all centered at the current state.
/// Kernel scales adapt during burn-in only and are frozen afterwards.
/// Deterministic given (data, k, family, config.seed).
inline ChainTrace run_chain(const Dataset& data, int k, const ComponentFamily& family,
                            const McmcConfig& config) {
  data.validate();
  config.validate();
  family.validate();
  if (k < 1) throw parameter_domain_error("k must be >= 1");

  const double dmean = data_mean(data);
  const double dsd = std::max(data_sd(data), 1e-12);
  const double drange = std::max(data_range(data), 1e-12);

  // initial kernel scales; the location and scale blocks adapt one scale per
  // coordinate (occupied and empty components need very different steps)
  const double w_scale0 =
      config.initial_scales.weights > 0.0 ? config.initial_scales.weights : 0.05;
  const double loc_scale0 =
      config.initial_scales.locations > 0.0 ? config.initial_scales.locations : 0.25 * dsd;
  const double sc_scale0 =
      config.initial_scales.scales > 0.0 ? config.initial_scales.scales : 0.25;
  const double hy_scale0 = config.initial_scales.hyper > 0.0 ? config.initial_scales.hyper : 0.25;

  // initialization: equal weights, component locations at data quantiles,
  // scales at the data sd
  std::vector<double> sorted = data.values;
  std::sort(sorted.begin(), sorted.end());
  MixtureParams params;
  params.family = family;
  params.weights.assign(k, 1.0 / k);
  params.locations.resize(k);
  for (int l = 0; l < k; ++l)
    params.locations[l] = quantile_sorted(sorted, (l + 0.5) / k);
  params.scales.assign(k, dsd);
  HierarchicalHyper hyper{dmean, dsd};

  const bool is_hier = config.prior_mode == PriorMode::hierarchical;
  const bool is_repar = config.prior_mode == PriorMode::cond_sigma_proper;

  IntegratorConfig integ = config.integrator;

  ChainTrace trace;
  trace.burn_in = config.burn_in;
  trace.prior_mode = config.prior_mode;
  trace.data_mean = dmean;
  trace.data_sd = dsd;
  trace.data_range = drange;
  trace.draws.reserve(static_cast<std::size_t>(config.iterations));

  Rng rng(config.seed);

  detail::LoglikCache lik;
  lik.init(data, params);
  double cur_ll = lik.total(params.weights);

  std::vector<detail::AdaptiveScale> w_scales, loc_scales, sc_scales, hy_scales;
  auto init_scales = [&](std::vector<detail::AdaptiveScale>& dst, std::size_t count,
                         double v0) {
    dst.assign(count, detail::AdaptiveScale{v0, 0, 0});
  };

  auto cumulative = [&](Block block) -> BlockStats& {
    return (trace.draws.size() < static_cast<std::size_t>(config.burn_in)
                ? trace.burnin_block_stats
                : trace.block_stats)[static_cast<int>(block)];
  };

  auto adapt_and_snapshot = [&](int iter) {
    if (iter >= config.burn_in || (iter + 1) % config.adaptation_window != 0) return;
    for (auto* group : {&w_scales, &loc_scales, &sc_scales, &hy_scales})
      for (auto& a : *group) a.adapt(config.target_accept_low, config.target_accept_high);
    trace.scale_history.push_back(
        {iter + 1,
         {detail::geometric_mean_scale(w_scales), detail::geometric_mean_scale(loc_scales),
          detail::geometric_mean_scale(sc_scales), detail::geometric_mean_scale(hy_scales)}});
  };

  auto finish = [&]() {
    trace.final_scales = {detail::geometric_mean_scale(w_scales),
                          detail::geometric_mean_scale(loc_scales),
                          detail::geometric_mean_scale(sc_scales),
                          detail::geometric_mean_scale(hy_scales)};
    const DiagnosticsReport rep = diagnose(trace, config.thresholds);
    trace.stuck = rep.stuck;
    trace.diverged = rep.diverged;
  };

  // ---- reparametrized-chart sampler (proper prior on the scale ratios) ----
  if (is_repar) {
    ReparamParams r = to_reparam(params);
    const bool pc = config.per_coordinate_scales;
    init_scales(w_scales, pc ? std::max<std::size_t>(r.sticks.size(), 1) : 1, w_scale0);
    init_scales(loc_scales, pc ? 1 + r.deltas.size() : 1, loc_scale0);
    init_scales(sc_scales, pc ? 1 + r.scale_ratios.size() : 1, sc_scale0);
    auto ratio_prior = [&](const ReparamParams& rr) {
      double v = 0.0;
      for (double rat : rr.scale_ratios) v += log_sigma_prior(rat, 1.0);
      return v;
    };
    auto cond_jeffreys = [&](const ReparamParams& rr) {
      return detail::safe_prior(
          [&] { return log_jeffreys_reparam_given_ratios(rr, family, integ).value; });
    };
    auto log_prior = [&](const ReparamParams& rr) {
      return ratio_prior(rr) + cond_jeffreys(rr);
    };
    auto loglik_of = [&](const ReparamParams& rr) {
      const MixtureParams mp = from_reparam(rr, family);
      for (int l = 0; l < k; ++l) lik.refresh(l, mp.locations[l], mp.scales[l]);
      return lik.total(mp.weights);
    };
    cur_ll = loglik_of(r);
    if (!std::isfinite(cur_ll + log_prior(r)))
      throw initialization_error(
          "target log posterior is -inf at the initial point; adjust the starting values "
          "or the data transform and retry");

    // Ratio moves hold the conditional-Jeffreys factor of the other
    // coordinates fixed: the factor's ratio-dependent magnitude is the
    // conditional law's intractable normalizer, and harvesting it would
    // absorb the ratios at zero. Every other move compares fresh values.
    auto try_move = [&](Block block, detail::AdaptiveScale& as, ReparamParams cand,
                        double log_corr) {
      const bool ratio_move = block == Block::scales && cand.tau == r.tau;
      const double cand_ll = loglik_of(cand);
      double delta;
      if (ratio_move) {
        delta = (cand_ll + ratio_prior(cand)) - (cur_ll + ratio_prior(r)) + log_corr;
      } else {
        delta = (cand_ll + ratio_prior(cand) + cond_jeffreys(cand)) -
                (cur_ll + ratio_prior(r) + cond_jeffreys(r)) + log_corr;
      }
      const bool acc = std::log(rng.uniform01()) < delta;
      as.bump(acc);
      ++cumulative(block).proposals;
      if (acc) {
        ++cumulative(block).accepts;
        r = std::move(cand);
        cur_ll = cand_ll;
      }
    };

    for (int iter = 0; iter < config.iterations; ++iter) {
      for (std::size_t j = 0; j < r.sticks.size(); ++j) {
        detail::AdaptiveScale& as = w_scales[pc ? j : 0];
        ReparamParams cand = r;
        const double sc = as.value;
        const double y = rng.truncated_normal(r.sticks[j], sc, 0.0, 1.0);
        cand.sticks[j] = y;
        const double corr =
            detail::log_truncnorm_mass(r.sticks[j], sc) - detail::log_truncnorm_mass(y, sc);
        try_move(Block::weights, as, std::move(cand), corr);
      }
      {
        ReparamParams cand = r;
        cand.mu = r.mu + loc_scales[0].value * rng.normal();
        try_move(Block::locations, loc_scales[0], std::move(cand), 0.0);
      }
      for (std::size_t j = 0; j < r.deltas.size(); ++j) {
        detail::AdaptiveScale& as = loc_scales[pc ? 1 + j : 0];
        ReparamParams cand = r;
        cand.deltas[j] = r.deltas[j] + as.value * rng.normal();
        try_move(Block::locations, as, std::move(cand), 0.0);
      }
      {
        ReparamParams cand = r;
        cand.tau = r.tau * std::exp(sc_scales[0].value * rng.normal());
        if (cand.tau >= detail::kScaleProposalFloor)
          try_move(Block::scales, sc_scales[0], std::move(cand), std::log(cand.tau / r.tau));
        else {
          sc_scales[0].bump(false);
          ++cumulative(Block::scales).proposals;
        }
      }
      for (std::size_t j = 0; j < r.scale_ratios.size(); ++j) {
        detail::AdaptiveScale& as = sc_scales[pc ? 1 + j : 0];
        ReparamParams cand = r;
        cand.scale_ratios[j] =
            r.scale_ratios[j] * std::exp(as.value * rng.normal());
        if (cand.scale_ratios[j] >= detail::kScaleProposalFloor)
          try_move(Block::scales, as, std::move(cand),
                   std::log(cand.scale_ratios[j] / r.scale_ratios[j]));
        else {
          as.bump(false);
          ++cumulative(Block::scales).proposals;
        }
      }

      trace.draws.push_back({from_reparam(r, family), hyper});
      adapt_and_snapshot(iter);
    }
    finish();
    return trace;
  }

  // ---- natural-chart samplers (hierarchical and full Jeffreys) ----
  const std::size_t coord_n =
      config.per_coordinate_scales ? static_cast<std::size_t>(k) : 1;
  init_scales(w_scales, 1, w_scale0);
  init_scales(loc_scales, coord_n, loc_scale0);
  init_scales(sc_scales, coord_n, sc_scale0);
  if (is_hier) init_scales(hy_scales, config.per_coordinate_scales ? 2 : 1, hy_scale0);

  auto expensive_prior = [&](const MixtureParams& mp) {
    return detail::safe_prior([&] {
      if (is_hier) return log_jeffreys_weights(mp.weights, mp, integ).value;
      return log_jeffreys(mp, Scenario::all_params(), integ).value;
    });
  };
  auto cheap_prior = [&](const MixtureParams& mp, const HierarchicalHyper& hy) {
    if (!is_hier) return 0.0;
    double v = log_hyperprior(hy.mu0, hy.zeta0);
    for (int l = 0; l < k; ++l) {
      v += log_mu_prior(mp.locations[l], hy.mu0, hy.zeta0);
      v += log_sigma_prior(mp.scales[l], hy.zeta0);
    }
    return v;
  };

  double cur_exp_prior = expensive_prior(params);
  double cur_cheap = cheap_prior(params, hyper);
  if (!std::isfinite(cur_ll + cur_exp_prior + cur_cheap))
    throw initialization_error(
        "target log posterior is -inf at the initial point; adjust the starting values or "
        "the data transform and retry");

  for (int iter = 0; iter < config.iterations; ++iter) {
    // weights block: joint truncated-normal move with complement closure
    if (k >= 2) {
      const WeightsProposal prop = propose_weights(params.weights, w_scales[0].value, rng);
      ++cumulative(Block::weights).proposals;
      if (!prop.valid) {
        w_scales[0].bump(false);
      } else {
        MixtureParams cand = params;
        cand.weights = prop.weights;
        const double cand_exp = expensive_prior(cand);
        const double cand_ll = lik.total(cand.weights);
        const double cand_cheap = cheap_prior(cand, hyper);
        const double delta = (cand_ll + cand_exp + cand_cheap) -
                             (cur_ll + cur_exp_prior + cur_cheap) + prop.log_correction;
        const bool acc = std::log(rng.uniform01()) < delta;
        w_scales[0].bump(acc);
        if (acc) {
          ++cumulative(Block::weights).accepts;
          params = std::move(cand);
          cur_ll = cand_ll;
          cur_exp_prior = cand_exp;
          cur_cheap = cand_cheap;
        }
      }
    }

    // locations block: componentwise normal moves
    for (int l = 0; l < k; ++l) {
      detail::AdaptiveScale& lsc = loc_scales[config.per_coordinate_scales ? l : 0];
      MixtureParams cand = params;
      cand.locations[l] = params.locations[l] + lsc.value * rng.normal();
      lik.refresh(l, cand.locations[l], cand.scales[l]);
      const double cand_ll = lik.total(cand.weights);
      const double cand_exp = expensive_prior(cand);
      const double cand_cheap = cheap_prior(cand, hyper);
      const double delta =
          (cand_ll + cand_exp + cand_cheap) - (cur_ll + cur_exp_prior + cur_cheap);
      const bool acc = std::log(rng.uniform01()) < delta;
      lsc.bump(acc);
      ++cumulative(Block::locations).proposals;
      if (acc) {
        ++cumulative(Block::locations).accepts;
        params = std::move(cand);
        cur_ll = cand_ll;
        cur_exp_prior = cand_exp;
        cur_cheap = cand_cheap;
      } else {
        lik.refresh(l, params.locations[l], params.scales[l]);
      }
    }

    // scales block: componentwise log-normal moves
    for (int l = 0; l < k; ++l) {
      detail::AdaptiveScale& ssc = sc_scales[config.per_coordinate_scales ? l : 0];
      const double cand_sigma = params.scales[l] * std::exp(ssc.value * rng.normal());
      ++cumulative(Block::scales).proposals;
      if (cand_sigma < detail::kScaleProposalFloor) {
        ssc.bump(false);
        continue;
      }
      MixtureParams cand = params;
      cand.scales[l] = cand_sigma;
      lik.refresh(l, cand.locations[l], cand.scales[l]);
      const double cand_ll = lik.total(cand.weights);
      const double cand_exp = expensive_prior(cand);
      const double cand_cheap = cheap_prior(cand, hyper);
      const double delta = (cand_ll + cand_exp + cand_cheap) -
                           (cur_ll + cur_exp_prior + cur_cheap) +
                           std::log(cand_sigma / params.scales[l]);
      const bool acc = std::log(rng.uniform01()) < delta;
      ssc.bump(acc);
      if (acc) {
        ++cumulative(Block::scales).accepts;
        params = std::move(cand);
        cur_ll = cand_ll;
        cur_exp_prior = cand_exp;
        cur_cheap = cand_cheap;
      } else {
        lik.refresh(l, params.locations[l], params.scales[l]);
      }
    }

    // hyper block (hierarchical only): normal on mu0, log-normal on zeta0.
    // Neither the likelihood nor the weights prior involves the hypers.
    if (is_hier) {
      {
        HierarchicalHyper cand = hyper;
        cand.mu0 = hyper.mu0 + hy_scales[0].value * rng.normal();
        const double cand_cheap = cheap_prior(params, cand);
        const bool acc = std::log(rng.uniform01()) < (cand_cheap - cur_cheap);
        hy_scales[0].bump(acc);
        ++cumulative(Block::hyper).proposals;
        if (acc) {
          ++cumulative(Block::hyper).accepts;
          hyper = cand;
          cur_cheap = cand_cheap;
        }
      }
      {
        detail::AdaptiveScale& hsc =
            hy_scales[config.per_coordinate_scales ? 1 : 0];
        HierarchicalHyper cand = hyper;
        cand.zeta0 = hyper.zeta0 * std::exp(hsc.value * rng.normal());
        ++cumulative(Block::hyper).proposals;
        if (cand.zeta0 >= detail::kScaleProposalFloor) {
          const double cand_cheap = cheap_prior(params, cand);
          const double delta = cand_cheap - cur_cheap + std::log(cand.zeta0 / hyper.zeta0);
          const bool acc = std::log(rng.uniform01()) < delta;
          hsc.bump(acc);
          if (acc) {
            ++cumulative(Block::hyper).accepts;
            hyper = cand;
            cur_cheap = cand_cheap;
          }
        } else {
          hsc.bump(false);
        }
      }
    }

    trace.draws.push_back({params, hyper});
    adapt_and_snapshot(iter);
  }

  finish();
  return trace;
}

}  // namespace jeffmix
