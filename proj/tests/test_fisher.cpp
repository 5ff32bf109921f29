#include <doctest.h>

#include <cmath>
#include <vector>

#include "jeffmix/fisher.hpp"
#include "test_helpers.hpp"

using namespace jeffmix;
using namespace jeffmix::testing;

namespace {

IntegratorConfig gk_cfg(double tol = 1e-8) {
  IntegratorConfig c;
  c.method = IntegratorMethod::gauss_kronrod;
  c.gk_rel_tol = tol;
  return c;
}

IntegratorConfig riemann_cfg(int points = 550) {
  IntegratorConfig c;
  c.method = IntegratorMethod::riemann;
  c.riemann_points = points;
  return c;
}

double gauss_pdf(double x, double m, double s) {
  return std::exp(-0.5 * sqr((x - m) / s)) / (s * std::sqrt(2.0 * 3.141592653589793));
}

}  // namespace

TEST_CASE("integrand matches the weights-chart form for k=2") {
  const auto m = gaussian_mixture({0.3, 0.7}, {-2.0, 1.0}, {1.0, 2.0});
  for (double x : {-3.0, -0.5, 0.0, 2.5}) {
    const double f1 = gauss_pdf(x, -2.0, 1.0);
    const double f2 = gauss_pdf(x, 1.0, 2.0);
    const double g = 0.3 * f1 + 0.7 * f2;
    CHECK(integrand(x, m, Scenario::weights_only(), 0, 0) ==
          doctest::Approx(sqr(f1 - f2) / g).epsilon(1e-12));
  }
}

TEST_CASE("integrand returns 0, not NaN, in a deep inter-mode trough") {
  const auto m = gaussian_mixture({0.5, 0.5}, {-1.0, 2.0}, {0.01, 0.01});
  const double v = integrand(0.5, m, Scenario::weights_only(), 0, 0);
  CHECK(v == 0.0);
  CHECK_FALSE(std::isnan(v));
}

TEST_CASE("single-Gaussian location integrand and its integral") {
  const double sigma = 1.4;
  const auto m = gaussian_mixture({1.0}, {0.7}, {sigma});
  const Scenario sc = Scenario::all_params();  // (mu, sigma) for k=1
  for (double x : {-1.0, 0.7, 2.0}) {
    const double f = gauss_pdf(x, 0.7, sigma);
    CHECK(integrand(x, m, sc, 0, 0) ==
          doctest::Approx(sqr((x - 0.7) / (sigma * sigma)) * f).epsilon(1e-12));
  }
  CHECK(fim_element(m, sc, 0, 0, gk_cfg()) ==
        doctest::Approx(1.0 / (sigma * sigma)).epsilon(1e-8));
}

TEST_CASE("single-Gaussian information matches the closed form") {
  for (double sigma : {0.5, 1.0, 2.0}) {
    const auto m = gaussian_mixture({1.0}, {0.3}, {sigma});
    const Scenario sc = Scenario::all_params();
    const FisherMatrix gk = fim(m, sc, gk_cfg());
    const FisherMatrix an = analytic_fim_gaussian_single(0.3, sigma);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        CHECK(gk.at(i, j) == doctest::Approx(an.at(i, j)).epsilon(1e-6));
    const FisherMatrix rm = fim(m, sc, riemann_cfg());
    CHECK(rm.at(0, 0) == doctest::Approx(1.0 / sqr(sigma)).epsilon(1e-4));
    CHECK(rm.at(1, 1) == doctest::Approx(2.0 / sqr(sigma)).epsilon(1e-4));
  }
}

TEST_CASE("analytic single-Gaussian oracle values") {
  const auto a1 = analytic_fim_gaussian_single(0.0, 1.0);
  CHECK(a1.at(0, 0) == doctest::Approx(1.0));
  CHECK(a1.at(1, 1) == doctest::Approx(2.0));
  const auto a2 = analytic_fim_gaussian_single(0.0, 2.0);
  CHECK(a2.at(0, 0) == doctest::Approx(0.25));
  CHECK(a2.at(1, 1) == doctest::Approx(0.5));
  CHECK_THROWS_AS(analytic_fim_gaussian_single(0.0, -1.0), const parameter_domain_error&);
}

TEST_CASE("benchmark model: riemann-550 agrees with gauss-kronrod, both match the oracle") {
  const auto m = three_component_benchmark();
  const Scenario sc = Scenario::weights_only();
  const double gk00 = fim_element(m, sc, 0, 0, gk_cfg());
  const double rm00 = fim_element(m, sc, 0, 0, riemann_cfg());
  CHECK(std::abs(rm00 - gk00) <= 1e-3 * std::abs(gk00));
  // frozen from a 50-digit quadrature
  CHECK(gk00 == doctest::Approx(5.326164042649817).epsilon(1e-7));
  CHECK(fim_element(m, sc, 0, 1, gk_cfg()) ==
        doctest::Approx(1.113093094916751).epsilon(1e-7));
  CHECK(fim_element(m, sc, 1, 1, gk_cfg()) ==
        doctest::Approx(5.705951725718470).epsilon(1e-7));

  // independent fine-grid oracle computed here with 1e5 midpoint knots
  const Bounds b = integration_bounds(m, 8.0);
  const int knots = 100000;
  const double h = (b.hi - b.lo) / knots;
  double fine = 0.0;
  for (int i = 0; i < knots; ++i) {
    const double x = b.lo + (i + 0.5) * h;
    const double f1 = gauss_pdf(x, -10.0, 1.0);
    const double f2 = gauss_pdf(x, 0.0, 5.0);
    const double f3 = gauss_pdf(x, 15.0, 7.0);
    const double g = 0.25 * f1 + 0.10 * f2 + 0.65 * f3;
    if (g > 0.0) fine += sqr(f1 - f3) / g * h;
  }
  CHECK(gk00 == doctest::Approx(fine).epsilon(1e-6));
}

TEST_CASE("separated two-component weights information vs fine-grid oracle") {
  const auto m = gaussian_mixture({0.5, 0.5}, {-10.0, 10.0}, {1.0, 1.0});
  const FisherMatrix f = fim(m, Scenario::weights_only(), gk_cfg());
  CHECK(f.dim == 1);
  CHECK(f.at(0, 0) == doctest::Approx(4.0).epsilon(1e-4));  // frozen fine-grid value
}

TEST_CASE("fim structure: symmetric and PSD up to quadrature noise") {
  Rng rng(17);
  for (int rep = 0; rep < 3; ++rep) {
    const auto m = random_mixture(2, rng);
    const FisherMatrix f = fim(m, Scenario::all_params(), riemann_cfg());
    double fmax = 0.0;
    for (int i = 0; i < f.dim; ++i)
      for (int j = 0; j < f.dim; ++j) fmax = std::max(fmax, std::abs(f.at(i, j)));
    for (int i = 0; i < f.dim; ++i)
      for (int j = 0; j < f.dim; ++j)
        CHECK(std::abs(f.at(i, j) - f.at(j, i)) <= 1e-10 * fmax);
    auto ev = sym_eigenvalues(f.entries);
    double evmax = 0.0;
    for (double v : ev) evmax = std::max(evmax, v);
    for (double v : ev) CHECK(v >= -1e-8 * evmax);
    // elementwise path computes (i,j) and (j,i) as separate integrals
    CHECK(fim_element(m, Scenario::all_params(), 0, 2, riemann_cfg()) ==
          doctest::Approx(fim_element(m, Scenario::all_params(), 2, 0, riemann_cfg()))
              .epsilon(1e-13));
  }
}

TEST_CASE("shared-sweep riemann path is bit-identical to the elementwise path") {
  Rng rng(23);
  const auto m = random_mixture(3, rng);
  const Scenario sc = Scenario::all_params();
  const FisherMatrix fast = fim(m, sc, riemann_cfg());
  for (int i = 0; i < fast.dim; ++i)
    for (int j = i; j < fast.dim; ++j)
      CHECK(fast.at(i, j) == fim_element(m, sc, i, j, riemann_cfg()));
}

TEST_CASE("select_integrator policy") {
  IntegratorConfig cfg;  // auto
  const auto big = gaussian_mixture({0.3, 0.3, 0.4}, {-1.0, 0.0, 2.0}, {1.0, 5.0, 7.0});
  CHECK(select_integrator(big, cfg).method == IntegratorMethod::riemann);
  CHECK(select_integrator(big, cfg).riemann_points == 550);

  const auto small = gaussian_mixture({0.5, 0.5}, {-1.0, 2.0}, {0.01, 0.01});
  CHECK(select_integrator(small, cfg).method == IntegratorMethod::monte_carlo);
  CHECK(select_integrator(small, cfg).mc_samples == 1500);

  const auto edge = gaussian_mixture({0.5, 0.5}, {-1.0, 2.0}, {0.05, 1.0});
  CHECK(select_integrator(edge, cfg).method == IntegratorMethod::riemann);  // inclusive

  IntegratorConfig explicit_gk = gk_cfg();
  CHECK(select_integrator(small, explicit_gk).method == IntegratorMethod::gauss_kronrod);
}

TEST_CASE("monte carlo elements: determinism, symmetry, stabilization") {
  const auto m = three_component_benchmark();
  const Scenario sc = Scenario::weights_only();
  IntegratorConfig mc;
  mc.method = IntegratorMethod::monte_carlo;
  mc.mc_samples = 500;
  mc.seed = 5;
  CHECK(fim_element(m, sc, 0, 1, mc) == fim_element(m, sc, 0, 1, mc));
  CHECK(fim_element(m, sc, 0, 1, mc) == fim_element(m, sc, 1, 0, mc));

  // sample SD over 100 replications is non-increasing in the MC sample size
  std::vector<double> sds;
  for (int samples : {500, 1000, 1500}) {
    std::vector<double> vals;
    for (int rep = 0; rep < 100; ++rep) {
      IntegratorConfig c = mc;
      c.mc_samples = samples;
      c.seed = Rng::derive(1234, rep);
      vals.push_back(fim_element(m, sc, 0, 0, c));
    }
    sds.push_back(sample_sd(vals));
  }
  CHECK(sds[1] <= sds[0]);
  CHECK(sds[2] <= sds[1]);
}

TEST_CASE("no NaN or Inf down to sigma = 1e-3") {
  const auto m = gaussian_mixture({0.5, 0.5}, {-1.0, 2.0}, {1e-3, 1e-3});
  IntegratorConfig cfg;  // auto resolves to monte carlo here
  const FisherMatrix f = fim(m, Scenario::weights_only(), cfg);
  CHECK(std::isfinite(f.at(0, 0)));
  const FisherMatrix r = fim(m, Scenario::weights_only(), riemann_cfg());
  CHECK(std::isfinite(r.at(0, 0)));
}

TEST_CASE("gauss-kronrod non-convergence carries the partial estimate") {
  const auto m = three_component_benchmark();
  IntegratorConfig tight = gk_cfg(1e-16);
  tight.gk_max_subdivisions = 2;
  try {
    (void)fim_element(m, Scenario::weights_only(), 0, 0, tight);
    FAIL("expected integration_error");
  } catch (const integration_error& e) {
    CHECK(std::isfinite(e.partial));  // best-effort estimate travels with the error
  }
}

TEST_CASE("scenario dimensions and ordering") {
  CHECK(Scenario::weights_only().dimension(3) == 2);
  CHECK(Scenario::locations_only().dimension(3) == 3);
  CHECK(Scenario::all_params().dimension(3) == 8);
  const auto r = param_ref(Scenario::all_params(), 3, 4);
  CHECK(r.block == ParamRef::Block::location);
  CHECK(r.component == 2);
  const auto s = param_ref(Scenario::all_params(), 3, 5);
  CHECK(s.block == ParamRef::Block::scale);
  CHECK(s.component == 0);
  CHECK_THROWS_AS(param_ref(Scenario::weights_only(), 2, 1), const parameter_domain_error&);
}

TEST_CASE("locations-only information for one Gaussian") {
  const auto m = gaussian_mixture({1.0}, {0.0}, {2.0});
  const FisherMatrix f = fim(m, Scenario::locations_only(), gk_cfg());
  CHECK(f.dim == 1);
  CHECK(f.at(0, 0) == doctest::Approx(0.25).epsilon(1e-7));
}
