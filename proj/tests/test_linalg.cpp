#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "jeffmix/linalg.hpp"

using namespace jeffmix;

TEST_CASE("jacobi eigenvalues on known matrices") {
  SymMatrix m(2);
  m.at(0, 0) = 2.0;
  m.at(1, 1) = 2.0;
  m.at(0, 1) = m.at(1, 0) = 1.0;
  auto ev = sym_eigenvalues(m);
  std::sort(ev.begin(), ev.end());
  CHECK(ev[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ev[1] == doctest::Approx(3.0).epsilon(1e-12));

  SymMatrix d(3);
  d.at(0, 0) = 4.0;
  d.at(1, 1) = 9.0;
  d.at(2, 2) = 16.0;
  auto evd = sym_eigenvalues(d);
  std::sort(evd.begin(), evd.end());
  CHECK(evd[0] == doctest::Approx(4.0));
  CHECK(evd[2] == doctest::Approx(16.0));
}

TEST_CASE("log_det_psd value and clamp policy") {
  SymMatrix m(2);
  m.at(0, 0) = 3.0;
  m.at(1, 1) = 5.0;
  m.at(0, 1) = m.at(1, 0) = 1.0;
  const auto r = log_det_psd(m);
  CHECK(r.value == doctest::Approx(std::log(14.0)).epsilon(1e-12));
  CHECK_FALSE(r.clamped);

  // exactly singular: eigenvalue clamped, flag set
  SymMatrix s(2);
  s.at(0, 0) = 1.0;
  s.at(1, 1) = 1.0;
  s.at(0, 1) = s.at(1, 0) = 1.0;
  const auto rs = log_det_psd(s);
  CHECK(rs.clamped);
  CHECK(rs.value < std::log(1e-10));

  // strongly indefinite: error
  SymMatrix bad(2);
  bad.at(0, 0) = 1.0;
  bad.at(1, 1) = -1.0;
  CHECK_THROWS_AS(log_det_psd(bad), const degenerate_information_error&);

  // all-nonpositive: error
  SymMatrix zero(1);
  zero.at(0, 0) = 0.0;
  CHECK_THROWS_AS(log_det_psd(zero), const degenerate_information_error&);

  // empty matrix: det 1
  CHECK(log_det_psd(SymMatrix(0)).value == 0.0);
}
