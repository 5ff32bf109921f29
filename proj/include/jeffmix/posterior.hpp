#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "jeffmix/math.hpp"
#include "jeffmix/mcmc.hpp"
#include "jeffmix/mixture.hpp"

namespace jeffmix {

struct CredibleInterval {
  double lo = 0.0;
  double hi = 0.0;
};

struct ComponentSummary {
  double weight_mean = 0.0, weight_sd = 0.0;
  double location_mean = 0.0, location_sd = 0.0;
  double scale_mean = 0.0, scale_sd = 0.0;
  CredibleInterval weight_ci, location_ci, scale_ci;
};

/// Posterior summary per (relabeled) component, sorted by posterior-mean
/// weight descending. Components below the display threshold are kept but
/// also aggregated into tail_weight_sum, mirroring how mixture tables
/// collapse the empty components into one row.
struct PosteriorSummary {
  std::vector<ComponentSummary> components;
  double ci_level = 0.95;
  double display_threshold = 0.01;
  double detect_threshold = 0.02;
  int displayed_components = 0;  // weight_mean >= display_threshold
  int detected_components = 0;   // weight_mean > detect_threshold
  double tail_weight_sum = 0.0;  // summed weight_mean below the display threshold
};

namespace detail {

inline CredibleInterval ci_of(std::vector<double> v, double level) {
  std::sort(v.begin(), v.end());
  const double a = 0.5 * (1.0 - level);
  return {quantile_sorted(v, a), quantile_sorted(v, 1.0 - a)};
}

}  // namespace detail

/// Summarize the kept draws of a trace. Relabels first, so the result is
/// invariant to any upstream permutation of component labels.
inline PosteriorSummary summarize(const ChainTrace& raw, double ci_level = 0.95) {
  if (raw.draws.empty() || raw.kept_count() == 0)
    throw parameter_domain_error("trace has no kept draws");
  const ChainTrace trace = relabel(raw);
  const int k = trace.draws.front().params.k();
  const std::size_t n = trace.kept_count();
  PosteriorSummary out;
  out.ci_level = ci_level;
  out.components.resize(k);
  std::vector<double> buf(n);
  for (int l = 0; l < k; ++l) {
    ComponentSummary& c = out.components[l];
    for (std::size_t i = 0; i < n; ++i) buf[i] = trace.kept(i).params.weights[l];
    c.weight_mean = mean(buf);
    c.weight_sd = sample_sd(buf);
    c.weight_ci = detail::ci_of(buf, ci_level);
    for (std::size_t i = 0; i < n; ++i) buf[i] = trace.kept(i).params.locations[l];
    c.location_mean = mean(buf);
    c.location_sd = sample_sd(buf);
    c.location_ci = detail::ci_of(buf, ci_level);
    for (std::size_t i = 0; i < n; ++i) buf[i] = trace.kept(i).params.scales[l];
    c.scale_mean = mean(buf);
    c.scale_sd = sample_sd(buf);
    c.scale_ci = detail::ci_of(buf, ci_level);
  }
  std::sort(out.components.begin(), out.components.end(),
            [](const ComponentSummary& a, const ComponentSummary& b) {
              if (a.weight_mean != b.weight_mean) return a.weight_mean > b.weight_mean;
              return a.location_mean < b.location_mean;
            });
  for (const auto& c : out.components) {
    if (c.weight_mean >= out.display_threshold) {
      ++out.displayed_components;
    } else {
      out.tail_weight_sum += c.weight_mean;
    }
    if (c.weight_mean > out.detect_threshold) ++out.detected_components;
  }
  return out;
}

/// Posterior predictive curve on a grid: pointwise mean of the per-draw
/// mixture densities plus a pointwise quantile band. The band is widened to
/// envelope the mean curve, so it contains it by construction.
struct PredictiveDensity {
  std::vector<double> grid;
  std::vector<double> mean_curve;
  std::vector<double> lower;  // 2.5% pointwise
  std::vector<double> upper;  // 97.5% pointwise
};

inline PredictiveDensity predictive_density(const ChainTrace& trace,
                                            const std::vector<double>& grid,
                                            std::size_t max_draws = 2000) {
  if (trace.draws.empty() || trace.kept_count() == 0)
    throw parameter_domain_error("trace has no kept draws");
  if (grid.empty()) throw parameter_domain_error("empty grid");
  const std::size_t n = trace.kept_count();
  const std::size_t stride = std::max<std::size_t>(1, n / max_draws);
  std::vector<std::size_t> use;
  for (std::size_t i = 0; i < n; i += stride) use.push_back(i);

  PredictiveDensity out;
  out.grid = grid;
  out.mean_curve.resize(grid.size());
  out.lower.resize(grid.size());
  out.upper.resize(grid.size());
  std::vector<double> vals(use.size());
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    for (std::size_t d = 0; d < use.size(); ++d)
      vals[d] = std::exp(log_density(grid[gi], trace.kept(use[d]).params));
    out.mean_curve[gi] = mean(vals);
    std::vector<double> sorted = vals;
    std::sort(sorted.begin(), sorted.end());
    out.lower[gi] = std::min(quantile_sorted(sorted, 0.025), out.mean_curve[gi]);
    out.upper[gi] = std::max(quantile_sorted(sorted, 0.975), out.mean_curve[gi]);
  }
  return out;
}

/// Equally spaced predictive grid over the data range widened by `pad` sds.
inline std::vector<double> default_grid(const Dataset& data, int points = 256,
                                        double pad = 1.5) {
  const auto [lo_it, hi_it] = std::minmax_element(data.values.begin(), data.values.end());
  const double sd = data_sd(data);
  const double lo = *lo_it - pad * sd;
  const double hi = *hi_it + pad * sd;
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i)
    g[i] = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
  return g;
}

}  // namespace jeffmix
