#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "jeffmix/errors.hpp"
#include "jeffmix/mixture.hpp"
#include "jeffmix/rng.hpp"

namespace jeffmix {

/// The classic 82 Corona Borealis galaxy velocities (Roeder 1990), in units
/// of 10^3 km/s, the scale on which mixture analyses of this sample report
/// component locations.
inline const std::vector<double>& galaxy_velocities() {
  static const std::vector<double> v = {
      9.172,  9.350,  9.483,  9.558,  9.775,  10.227, 10.406, 16.084, 16.170, 18.419,
      18.552, 18.600, 18.927, 19.052, 19.070, 19.330, 19.343, 19.349, 19.440, 19.473,
      19.529, 19.541, 19.547, 19.663, 19.846, 19.856, 19.863, 19.914, 19.918, 19.973,
      19.989, 20.166, 20.175, 20.179, 20.196, 20.215, 20.221, 20.415, 20.629, 20.795,
      20.821, 20.846, 20.875, 20.986, 21.137, 21.492, 21.701, 21.814, 21.921, 21.960,
      22.185, 22.209, 22.242, 22.249, 22.314, 22.374, 22.495, 22.746, 22.747, 22.888,
      22.914, 23.206, 23.241, 23.263, 23.484, 23.538, 23.542, 23.666, 23.706, 23.711,
      24.129, 24.285, 24.289, 24.366, 24.717, 24.990, 25.633, 26.960, 26.995, 32.065,
      32.789, 34.279};
  return v;
}

inline Dataset load_galaxy() {
  Dataset d;
  d.values = galaxy_velocities();
  d.name = "galaxy";
  d.transform = Dataset::Transform::none;
  return d;
}

namespace detail {

/// Deterministic draw from a Gaussian mixture with a positivity floor
/// (resample) for benchmark data that lives on a positive scale.
inline std::vector<double> positive_gaussian_mixture_sample(int n,
                                                            const std::vector<double>& w,
                                                            const std::vector<double>& mu,
                                                            const std::vector<double>& sd,
                                                            double floor, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(n);
  while (static_cast<int>(out.size()) < n) {
    const int l = rng.categorical(w);
    const double x = mu[l] + sd[l] * rng.normal();
    if (x > floor) out.push_back(x);
  }
  return out;
}

}  // namespace detail

/// Synthetic benchmark with the size and shape of the classic enzymatic-ratio
/// study (245 plasma metabolic ratios, strongly bimodal with a small diffuse
/// remainder). Values are drawn once, deterministically.
inline Dataset load_enzyme() {
  // two dominant groups plus two faint wide ones; weights renormalized
  const std::vector<double> w = {0.613, 0.347, 0.021, 0.019};
  const std::vector<double> mu = {0.193, 1.216, 0.915, 1.176};
  const std::vector<double> sd = {0.090, 0.348, 1.174, 0.702};
  Dataset d;
  d.values = detail::positive_gaussian_mixture_sample(245, w, mu, sd, 0.01, 761923);
  d.name = "enzyme";
  d.transform = Dataset::Transform::none;
  return d;
}

/// Synthetic benchmark with the size and shape of the classic lake-acidity
/// study: 155 acid-neutralizing-capacity measurements analyzed on the log
/// scale. The dataset here is already log-transformed; the CSV in data/
/// stores the raw (exponentiated) values with a log-transform sidecar.
inline Dataset load_acidity() {
  const std::vector<double> w = {0.610, 0.384, 0.003, 0.003};
  const std::vector<double> mu = {4.356, 6.294, 0.083, 0.125};
  const std::vector<double> sd = {0.442, 0.531, 0.802, 0.589};
  Rng rng(881217);
  std::vector<double> logv;
  logv.reserve(155);
  for (int i = 0; i < 155; ++i) {
    const int l = rng.categorical(w);
    logv.push_back(mu[l] + sd[l] * rng.normal());
  }
  Dataset d;
  d.values = std::move(logv);
  d.name = "acidity";
  d.transform = Dataset::Transform::log_scale;
  return d;
}

/// Synthetic benchmark shaped like flow-entry retrieval times from a packet
/// monitor (nanoseconds): a fast cache group, a dominant mid group and a
/// slow, wide memory group, each right-skewed. Drawn from a Gumbel mixture,
/// so the tails genuinely are asymmetric.
inline Dataset load_network() {
  MixtureParams truth;
  truth.family = ComponentFamily::gumbel();
  truth.weights = {0.265, 0.521, 0.214};
  truth.locations = {83.260, 160.164, 213.512};
  truth.scales = {3.348, 7.959, 59.080};
  Dataset d = simulate(2000, truth, 550712);
  d.name = "network";
  d.transform = Dataset::Transform::none;
  return d;
}

inline Dataset load_builtin(const std::string& name) {
  if (name == "galaxy") return load_galaxy();
  if (name == "enzyme") return load_enzyme();
  if (name == "acidity") return load_acidity();
  if (name == "network") return load_network();
  throw config_error("unknown builtin dataset: " + name +
                     " (expected galaxy, enzyme, acidity or network)");
}

/// Single-column CSV with a header line. A `log` transform is applied at
/// load; raw values must then be positive.
inline Dataset load_csv(const std::filesystem::path& path,
                        Dataset::Transform transform = Dataset::Transform::none,
                        std::string name = "") {
  std::ifstream in(path);
  if (!in) throw error("cannot open dataset file: " + path.string());
  Dataset d;
  d.name = name.empty() ? path.stem().string() : std::move(name);
  d.transform = transform;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    char* end = nullptr;
    const double v = std::strtod(line.c_str(), &end);
    if (end == line.c_str() || (end && *end != '\0')) {
      if (first) {
        first = false;  // header line
        continue;
      }
      throw error("unparseable value in " + path.string() + ": '" + line + "'");
    }
    first = false;
    if (transform == Dataset::Transform::log_scale) {
      if (!(v > 0.0))
        throw parameter_domain_error("log transform requires positive raw values, got " +
                                     line + " in " + path.string());
      d.values.push_back(std::log(v));
    } else {
      d.values.push_back(v);
    }
  }
  d.validate();
  return d;
}

}  // namespace jeffmix
