// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "specrec/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "specrec/errors.hpp"

namespace specrec {
namespace {

constexpr int kMaxSweeps = 100;

double off_diagonal_sq(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) s += 2.0 * a(i, j) * a(i, j);
  return s;
}

void rotate(Matrix& a, Matrix& v, std::size_t p, std::size_t q) {
  const double apq = a(p, q);
  const double app = a(p, p);
  const double aqq = a(q, q);
  const double theta = (aqq - app) / (2.0 * apq);
  const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  const std::size_t n = a.rows();
  for (std::size_t k = 0; k < n; ++k) {
    if (k == p || k == q) continue;
    const double akp = a(k, p);
    const double akq = a(k, q);
    const double np = c * akp - s * akq;
    const double nq = s * akp + c * akq;
    a(k, p) = a(p, k) = np;
    a(k, q) = a(q, k) = nq;
  }
  a(p, p) = app - t * apq;
  a(q, q) = aqq + t * apq;
  a(p, q) = a(q, p) = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double vkp = v(k, p);
    const double vkq = v(k, q);
    v(k, p) = c * vkp - s * vkq;
    v(k, q) = s * vkp + c * vkq;
  }
}

}  // namespace

SymEigen sym_eigendecompose(const Matrix& m) {
  const std::size_t n = m.rows();
  if (m.cols() != n) throw InputError("sym_eigendecompose: matrix is not square");
  if (n > kMaxDenseEigenSize) {
    throw CapabilityError("sym_eigendecompose: size " + std::to_string(n) + " exceeds dense limit " +
                          std::to_string(kMaxDenseEigenSize));
  }
  if (!m.all_finite()) throw InputError("sym_eigendecompose: non-finite entries");
  if (n == 0) return {};

  double scale = 0.0;
  for (double x : m.data()) scale = std::max(scale, std::abs(x));
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(m(i, j) - m(j, i)) > 1e-9 * std::max(scale, 1.0)) {
        throw InputError("sym_eigendecompose: matrix not symmetric at (" + std::to_string(i) + "," +
                         std::to_string(j) + ")");
      }
      a(i, j) = 0.5 * (m(i, j) + m(j, i));
    }
  }
  Matrix v = Matrix::identity(n);

  const double total = squared_norm(a);
  const double target = total * 1e-30;
  bool converged = total == 0.0;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    if (off_diagonal_sq(a) <= target) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Entries negligible against both diagonals are dropped outright.
        if (std::abs(apq) < 1e-300 ||
            (sweep > 3 && std::abs(apq) * 1e18 < std::min(std::abs(a(p, p)), std::abs(a(q, q))))) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        rotate(a, v, p, q);
      }
    }
  }
  if (!converged && off_diagonal_sq(a) > target) {
    throw NumericError("sym_eigendecompose: Jacobi iteration did not converge for " + std::to_string(n) +
                       "x" + std::to_string(n) + " matrix");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

  SymEigen out{std::vector<double>(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.values[k] = a(src, src);
    double sign = 1.0;
    for (std::size_t r = 0; r < n; ++r) {
      if (std::abs(v(r, src)) > 1e-10) {
        sign = v(r, src) < 0.0 ? -1.0 : 1.0;
        break;
      }
    }
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = sign * v(r, src);
  }
  return out;
}

double reconstruction_error(const SymEigen& eig, const Matrix& m) {
  const std::size_t n = m.rows();
  Matrix scaled = eig.vectors;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < n; ++k) scaled(r, k) *= eig.values[k];
  const Matrix rebuilt = matmul_nt(scaled, eig.vectors);
  const double denom = frobenius_norm(m);
  const double err = frobenius_norm(rebuilt - m);
  return denom == 0.0 ? err : err / denom;
}

}  // namespace specrec
