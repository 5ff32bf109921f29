#include <doctest.h>

#include <cmath>
#include <vector>

#include "jeffmix/mixture.hpp"
#include "jeffmix/reparam.hpp"
#include "test_helpers.hpp"

using namespace jeffmix;
using namespace jeffmix::testing;

namespace {

// Independent long-double direct summation of a Gaussian mixture density.
long double direct_gaussian_mixture_density(long double x, const MixtureParams& p) {
  long double g = 0.0L;
  for (int l = 0; l < p.k(); ++l) {
    const long double z = (x - (long double)p.locations[l]) / (long double)p.scales[l];
    g += (long double)p.weights[l] * expl(-0.5L * z * z) /
         ((long double)p.scales[l] * sqrtl(2.0L * 3.14159265358979323846264338327950288L));
  }
  return g;
}

}  // namespace

TEST_CASE("log_density pinned values") {
  CHECK(log_density(0.0, standard_normal()) ==
        doctest::Approx(-0.9189385332046727).epsilon(1e-14));

  const auto sym = gaussian_mixture({0.5, 0.5}, {-3.0, 3.0}, {1.0, 1.0});
  CHECK(log_density(0.0, sym) == doctest::Approx(-5.418938533204673).epsilon(1e-14));

  // three-term sum, frozen from a 50-digit evaluation
  const auto three = three_component_benchmark();
  const double frozen = -4.338320683419271;
  CHECK(log_density(1.2, three) == doctest::Approx(frozen).epsilon(1e-13));
  // in-test oracle: direct summation in extended precision
  const double oracle = (double)logl(direct_gaussian_mixture_density(1.2L, three));
  CHECK(log_density(1.2, three) == doctest::Approx(oracle).epsilon(1e-14));
  CHECK(oracle == doctest::Approx(frozen).epsilon(1e-14));
}

TEST_CASE("log_density finite in deep troughs, domain errors propagate") {
  const auto trough = gaussian_mixture({0.5, 0.5}, {-1.0, 2.0}, {0.01, 0.01});
  CHECK(std::isfinite(log_density(0.5, trough)));

  MixtureParams bad = standard_normal();
  bad.scales[0] = -1.0;
  CHECK_THROWS_AS(log_density(0.0, bad), const parameter_domain_error&);
  MixtureParams bad2 = gaussian_mixture({0.6, 0.6}, {0.0, 1.0}, {1.0, 1.0});
  CHECK_THROWS_AS(log_density(0.0, bad2), const parameter_domain_error&);
}

TEST_CASE("zero weights are legal and contribute nothing") {
  const auto degen = gaussian_mixture({1.0, 0.0}, {0.0, 50.0}, {1.0, 1.0});
  CHECK(log_density(0.3, degen) ==
        doctest::Approx(log_density(0.3, standard_normal())).epsilon(1e-15));
}

TEST_CASE("log_likelihood reductions") {
  Dataset one;
  one.values = {0.7};
  const auto m = gaussian_mixture({0.4, 0.6}, {-1.0, 2.0}, {1.0, 0.5});
  CHECK(log_likelihood(one, m) == doctest::Approx(log_density(0.7, m)).epsilon(1e-15));

  Dataset five;
  five.values = {0.1, -0.4, 2.2, 1.0, -3.1};
  Dataset ten = five;
  ten.values.insert(ten.values.end(), five.values.begin(), five.values.end());
  CHECK(log_likelihood(ten, m) ==
        doctest::Approx(2.0 * log_likelihood(five, m)).epsilon(1e-13));

  CHECK(log_likelihood(five, m) ==
        doctest::Approx(brute_force_log_likelihood(five, m)).epsilon(1e-11));

  Dataset empty;
  CHECK_THROWS_AS(log_likelihood(empty, m), const parameter_domain_error&);
}

TEST_CASE("complete_log_likelihood") {
  const auto m1 = standard_normal();
  Dataset d;
  d.values = {0.2, -1.0, 0.5};
  AllocationVector z1;
  z1.z = {0, 0, 0};
  CHECK(complete_log_likelihood(d, z1, m1) ==
        doctest::Approx(log_likelihood(d, m1)).epsilon(1e-14));

  // hand-computed case: x=(0.5,-0.2,1.4), z=(1,1,2), p=(0.3,0.7), N(0,1), N(1,2)
  const auto m2 = gaussian_mixture({0.3, 0.7}, {0.0, 1.0}, {1.0, 2.0});
  Dataset dh;
  dh.values = {0.5, -0.2, 1.4};
  AllocationVector zh;
  zh.z = {0, 0, 1};
  CHECK(complete_log_likelihood(dh, zh, m2) ==
        doctest::Approx(-6.379583332764568).epsilon(1e-13));

  // law of total probability at small n: summing exp(complete) over all
  // allocations recovers exp(log_likelihood)
  LogSumExpAccumulator acc;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) {
        AllocationVector z;
        z.z = {a, b, c};
        acc.add(complete_log_likelihood(dh, z, m2));
      }
  CHECK(acc.value() == doctest::Approx(log_likelihood(dh, m2)).epsilon(1e-12));

  AllocationVector bad;
  bad.z = {0, 2, 0};
  CHECK_THROWS_AS(complete_log_likelihood(dh, bad, m2), const allocation_error&);
  AllocationVector short_z;
  short_z.z = {0, 1};
  CHECK_THROWS_AS(complete_log_likelihood(dh, short_z, m2), const allocation_error&);

  // allocating to a zero-weight component is impossible
  const auto degen = gaussian_mixture({1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0});
  AllocationVector zz;
  zz.z = {1, 0, 0};
  CHECK(complete_log_likelihood(dh, zz, degen) == kNegInf);
}

TEST_CASE("brute force allocation oracle") {
  const auto m = gaussian_mixture({0.3, 0.7}, {-1.0, 1.5}, {0.8, 1.2});
  Dataset d2;
  d2.values = {0.4, -0.9};
  CHECK(brute_force_log_likelihood(d2, m) ==
        doctest::Approx(log_likelihood(d2, m)).epsilon(1e-13));

  Rng rng(99);
  const auto m3 = random_mixture(3, rng);
  Dataset d8;
  for (int i = 0; i < 8; ++i) d8.values.push_back(rng.uniform(-5.0, 5.0));
  CHECK(brute_force_log_likelihood(d8, m3) ==
        doctest::Approx(log_likelihood(d8, m3)).epsilon(1e-11));

  const auto degen = gaussian_mixture({1.0, 0.0}, {0.0, 9.0}, {1.0, 1.0});
  CHECK(brute_force_log_likelihood(d2, degen) ==
        doctest::Approx(log_likelihood(d2, standard_normal())).epsilon(1e-12));

  Dataset d30;
  for (int i = 0; i < 30; ++i) d30.values.push_back(0.1 * i);
  CHECK_THROWS_AS(brute_force_log_likelihood(d30, m3), const instance_too_large_error&);
}

TEST_CASE("simulate: law of large numbers and determinism") {
  const auto sn = standard_normal();
  const Dataset d = simulate(100000, sn, 31);
  CHECK(data_mean(d) == doctest::Approx(0.0).epsilon(0.02));
  CHECK(data_sd(d) == doctest::Approx(1.0).epsilon(0.02));

  const auto two = gaussian_mixture({0.5, 0.5}, {-3.0, 3.0}, {1.0, 1.0});
  const Dataset d2 = simulate(100000, two, 32);
  int below = 0;
  for (double x : d2.values) below += x < 0.0;
  CHECK(std::abs(below / 100000.0 - 0.5) < 0.01);

  const Dataset a = simulate(1000, two, 7);
  const Dataset b = simulate(1000, two, 7);
  CHECK(a.values == b.values);  // bit identical
  CHECK_THROWS_AS(simulate(0, sn, 1), const parameter_domain_error&);
}

TEST_CASE("density normalizes on the 10-sigma window") {
  Rng rng(123);
  for (int k = 1; k <= 3; ++k) {
    const auto m = random_mixture(k, rng);
    double lo = m.locations[0], hi = m.locations[0], smax = 0.0;
    for (int l = 0; l < k; ++l) {
      lo = std::min(lo, m.locations[l]);
      hi = std::max(hi, m.locations[l]);
      smax = std::max(smax, m.scales[l]);
    }
    lo -= 10.0 * smax;
    hi += 10.0 * smax;
    const int n = 20000;
    const double h = (hi - lo) / n;
    double integral = 0.0;
    for (int i = 0; i < n; ++i) integral += std::exp(log_density(lo + (i + 0.5) * h, m)) * h;
    CHECK(integral > 0.999);
    CHECK(integral < 1.001);
  }
}

TEST_CASE("reparametrization: examples and round trip") {
  const auto m = gaussian_mixture({0.5, 0.5}, {0.0, 2.0}, {1.0, 3.0});
  const ReparamParams r = to_reparam(m);
  CHECK(r.mu == doctest::Approx(0.0));
  CHECK(r.tau == doctest::Approx(1.0));
  CHECK(r.deltas[0] == doctest::Approx(2.0));
  CHECK(r.scale_ratios[0] == doctest::Approx(3.0));
  CHECK(r.sticks[0] == doctest::Approx(0.5));

  const auto single = gaussian_mixture({1.0}, {4.2}, {2.5});
  const ReparamParams r1 = to_reparam(single);
  CHECK(r1.mu == doctest::Approx(4.2));
  CHECK(r1.tau == doctest::Approx(2.5));
  CHECK(r1.deltas.empty());
  CHECK(r1.sticks.empty());

  Rng rng(55);
  for (int k = 1; k <= 5; ++k) {
    for (int rep = 0; rep < 10; ++rep) {
      const auto orig = random_mixture(k, rng);
      const auto back = from_reparam(to_reparam(orig), orig.family);
      for (int l = 0; l < k; ++l) {
        CHECK(back.weights[l] == doctest::Approx(orig.weights[l]).epsilon(1e-12));
        CHECK(back.locations[l] == doctest::Approx(orig.locations[l]).epsilon(1e-12));
        CHECK(back.scales[l] == doctest::Approx(orig.scales[l]).epsilon(1e-12));
      }
    }
  }

  ReparamParams bad;
  bad.tau = -1.0;
  CHECK_THROWS_AS(from_reparam(bad, ComponentFamily::gaussian()),
                  const parameter_domain_error&);
}

TEST_CASE("reparam jacobian log det matches finite differences (k=2)") {
  // chart (stick, mu, delta, tau) -> (p1, mu1, mu2, s1, s2): det = remaining * tau^2
  ReparamParams r;
  r.mu = 0.5;
  r.tau = 1.7;
  r.deltas = {0.8};
  r.scale_ratios = {2.2};
  r.sticks = {0.3};
  CHECK(log_abs_det_reparam_jacobian(r) ==
        doctest::Approx(2.0 * std::log(1.7)).epsilon(1e-12));
}
