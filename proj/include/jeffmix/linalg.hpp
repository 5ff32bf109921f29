#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "jeffmix/errors.hpp"

namespace jeffmix {

/// Dense symmetric matrix, row-major. Dimensions here are tiny (at most a few
/// dozen), so everything is O(n^3) without blocking.
struct SymMatrix {
  int dim = 0;
  std::vector<double> a;  // dim*dim

  SymMatrix() = default;
  explicit SymMatrix(int n) : dim(n), a(static_cast<std::size_t>(n) * n, 0.0) {}

  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * dim + j]; }
  double at(int i, int j) const { return a[static_cast<std::size_t>(i) * dim + j]; }
};

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
inline std::vector<double> sym_eigenvalues(SymMatrix m) {
  const int n = m.dim;
  if (n == 0) return {};
  if (n == 1) return {m.at(0, 0)};
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += m.at(i, j) * m.at(i, j);
    if (off < 1e-300) break;
    double diag = 0.0;
    for (int i = 0; i < n; ++i) diag += m.at(i, i) * m.at(i, i);
    if (off <= 1e-30 * (diag + off)) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = m.at(p, q);
        if (apq == 0.0) continue;
        const double app = m.at(p, p);
        const double aqq = m.at(q, q);
        const double theta = 0.5 * (aqq - app) / apq;
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int i = 0; i < n; ++i) {
          const double aip = m.at(i, p);
          const double aiq = m.at(i, q);
          m.at(i, p) = c * aip - s * aiq;
          m.at(i, q) = s * aip + c * aiq;
        }
        for (int i = 0; i < n; ++i) {
          const double api = m.at(p, i);
          const double aqi = m.at(q, i);
          m.at(p, i) = c * api - s * aqi;
          m.at(q, i) = s * api + c * aqi;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (int i = 0; i < n; ++i) ev[i] = m.at(i, i);
  return ev;
}

// Eigenvalues below kEigenClampRel * lambda_max are clamped (quadrature noise
// can push a near-singular information matrix slightly indefinite); anything
// below -kEigenNegTolRel * lambda_max means the matrix is genuinely broken.
inline constexpr double kEigenClampRel = 1e-12;
inline constexpr double kEigenNegTolRel = 1e-4;

struct LogDetResult {
  double value = 0.0;
  bool clamped = false;  // at least one eigenvalue was lifted to the floor
};

/// log det of a PSD matrix via its eigenvalues, with the clamp policy above.
/// An empty matrix has det 1 (log 0).
inline LogDetResult log_det_psd(const SymMatrix& m) {
  LogDetResult res;
  if (m.dim == 0) return res;
  const std::vector<double> ev = sym_eigenvalues(m);
  double lambda_max = 0.0;
  for (double v : ev) lambda_max = std::max(lambda_max, v);
  if (!(lambda_max > 0.0))
    throw degenerate_information_error("information matrix has no positive eigenvalue");
  const double floor = kEigenClampRel * lambda_max;
  double sum = 0.0;
  for (double v : ev) {
    if (v < -kEigenNegTolRel * lambda_max)
      throw degenerate_information_error(
          "information matrix indefinite beyond jitter budget (eigenvalue " +
          std::to_string(v) + " vs max " + std::to_string(lambda_max) + ")");
    if (v < floor) {
      v = floor;
      res.clamped = true;
    }
    sum += std::log(v);
  }
  res.value = sum;
  return res;
}

/// Lower-triangular Cholesky factor (row-major, dim x dim). Returns false if
/// the matrix is not positive definite.
inline bool cholesky_lower(const SymMatrix& m, std::vector<double>& lower) {
  const int n = m.dim;
  lower.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = m.at(i, j);
      for (int t = 0; t < j; ++t)
        s -= lower[static_cast<std::size_t>(i) * n + t] * lower[static_cast<std::size_t>(j) * n + t];
      if (i == j) {
        if (!(s > 0.0)) return false;
        lower[static_cast<std::size_t>(i) * n + j] = std::sqrt(s);
      } else {
        lower[static_cast<std::size_t>(i) * n + j] =
            s / lower[static_cast<std::size_t>(j) * n + j];
      }
    }
  }
  return true;
}

}  // namespace jeffmix
