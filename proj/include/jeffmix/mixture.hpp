#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "jeffmix/errors.hpp"
#include "jeffmix/families.hpp"
#include "jeffmix/math.hpp"
#include "jeffmix/rng.hpp"

namespace jeffmix {

/// Full parameter state of a k-component location-scale mixture.
/// Weights live on the simplex (zero weights are legal inputs); scales are
/// strictly positive.
struct MixtureParams {
  std::vector<double> weights;
  std::vector<double> locations;
  std::vector<double> scales;
  ComponentFamily family;

  int k() const { return static_cast<int>(weights.size()); }

  void validate() const {
    if (weights.empty())
      throw parameter_domain_error("mixture needs at least one component");
    if (locations.size() != weights.size() || scales.size() != weights.size())
      throw parameter_domain_error("weights/locations/scales sizes differ");
    double sum = 0.0;
    for (double p : weights) {
      if (!(p >= 0.0) || p > 1.0)
        throw parameter_domain_error("weight outside [0,1]: " + std::to_string(p));
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw parameter_domain_error("weights sum to " + std::to_string(sum) + ", not 1");
    for (double s : scales)
      if (!(s > 0.0)) throw parameter_domain_error("scale must be positive, got " + std::to_string(s));
    family.validate();
  }
};

/// Observed sample. `values` are on the analyzed scale; `transform` records
/// what the loader applied to the raw file (log requires positive raw data).
struct Dataset {
  std::vector<double> values;
  std::string name;
  enum class Transform { none, log_scale };
  Transform transform = Transform::none;

  std::size_t n() const { return values.size(); }
  void validate() const {
    if (values.empty()) throw parameter_domain_error("dataset is empty");
  }
};

/// Latent component allocations, 0-based component indices.
struct AllocationVector {
  std::vector<int> z;

  void validate(std::size_t n, int k) const {
    if (z.size() != n)
      throw allocation_error("allocation length " + std::to_string(z.size()) +
                             " does not match sample size " + std::to_string(n));
    for (int zi : z)
      if (zi < 0 || zi >= k)
        throw allocation_error("allocation index " + std::to_string(zi) +
                               " outside [0," + std::to_string(k) + ")");
  }
};

/// log of the mixture density at x, via log-sum-exp over components.
/// Zero-weight components contribute nothing.
inline double log_density(double x, const MixtureParams& params) {
  params.validate();
  double acc = kNegInf;
  for (int l = 0; l < params.k(); ++l) {
    if (params.weights[l] <= 0.0) continue;
    acc = log_sum_exp(acc, std::log(params.weights[l]) +
                               family_log_pdf(params.family, x, params.locations[l],
                                              params.scales[l]));
  }
  return acc;
}

inline double log_likelihood(const Dataset& data, const MixtureParams& params) {
  data.validate();
  params.validate();
  double ll = 0.0;
  for (double x : data.values) ll += log_density(x, params);
  return ll;
}

/// Complete-data log likelihood: sum of within-component log densities plus
/// n_l * log p_l allocation terms (skipped when n_l = 0, so zero weights stay
/// legal as long as nothing is allocated to them).
inline double complete_log_likelihood(const Dataset& data, const AllocationVector& alloc,
                                      const MixtureParams& params) {
  data.validate();
  params.validate();
  alloc.validate(data.n(), params.k());
  std::vector<int> counts(params.k(), 0);
  double ll = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    const int l = alloc.z[i];
    counts[l] += 1;
    ll += family_log_pdf(params.family, data.values[i], params.locations[l], params.scales[l]);
  }
  for (int l = 0; l < params.k(); ++l) {
    if (counts[l] == 0) continue;
    ll += counts[l] * std::log(params.weights[l]);  // -inf if p_l == 0: impossible allocation
  }
  return ll;
}

/// Allocation-expansion oracle: log sum over all k^n allocations of
/// exp(complete_log_likelihood). Exact but exponential; guarded at 1e7 terms.
inline double brute_force_log_likelihood(const Dataset& data, const MixtureParams& params) {
  data.validate();
  params.validate();
  const int k = params.k();
  const std::size_t n = data.n();
  double terms = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    terms *= k;
    if (terms > 1e7)
      throw instance_too_large_error("k^n exceeds 1e7 allocation terms");
  }
  AllocationVector alloc;
  alloc.z.assign(n, 0);
  LogSumExpAccumulator acc;
  for (;;) {
    acc.add(complete_log_likelihood(data, alloc, params));
    // odometer over allocations
    std::size_t pos = 0;
    while (pos < n) {
      if (++alloc.z[pos] < k) break;
      alloc.z[pos] = 0;
      ++pos;
    }
    if (pos == n) break;
  }
  return acc.value();
}

/// i.i.d. simulation: component by weight, then the component law.
/// Identical seed gives a bit-identical dataset.
inline Dataset simulate(int n, const MixtureParams& params, std::uint64_t seed) {
  if (n <= 0) throw parameter_domain_error("simulate requires n >= 1");
  params.validate();
  Rng rng(seed);
  Dataset out;
  out.name = "simulated";
  out.values.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int l = rng.categorical(params.weights);
    out.values.push_back(
        family_sample(params.family, params.locations[l], params.scales[l], rng));
  }
  return out;
}

inline double data_mean(const Dataset& d) { return mean(d.values); }
inline double data_sd(const Dataset& d) { return sample_sd(d.values); }
inline double data_range(const Dataset& d) {
  const auto [lo, hi] = std::minmax_element(d.values.begin(), d.values.end());
  return *hi - *lo;
}

}  // namespace jeffmix
