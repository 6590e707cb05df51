// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "specrec/tfm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "specrec/dft.hpp"
#include "specrec/errors.hpp"
#include "specrec/io.hpp"

namespace specrec {

void ButterworthSpec::validate() const {
  if (!(cutoff > 0.0 && cutoff <= 1.0)) {
    throw InputError("butterworth cutoff must lie in (0, 1], got " + format_double(cutoff));
  }
  if (order < 1) throw InputError("butterworth order must be at least 1, got " + std::to_string(order));
}

double bin_frequency(std::size_t k, std::size_t t) {
  return 2.0 * static_cast<double>(std::min(k, t - k)) / static_cast<double>(t);
}

std::vector<double> butterworth_gains(const ButterworthSpec& spec, std::size_t t) {
  spec.validate();
  if (t == 0) throw InputError("butterworth gains need T >= 1");
  std::vector<double> g(t);
  for (std::size_t k = 0; k < t; ++k) {
    const double ratio = bin_frequency(k, t) / spec.cutoff;
    g[k] = std::sqrt(1.0 / (1.0 + std::pow(ratio, 2.0 * spec.order)));
  }
  return g;
}

Matrix tfm_apply(const Matrix& h, const ButterworthSpec& spec) {
  if (!h.all_finite()) throw InputError("tfm: hidden states contain non-finite values");
  if (h.rows() == 0) throw InputError("tfm: empty sequence");
  const auto gains = butterworth_gains(spec, h.rows());
  if (h.rows() == 1) return h;
  return filter_columns(h, gains);
}

std::string gain_table_csv(const ButterworthSpec& spec, std::size_t t) {
  const auto g = butterworth_gains(spec, t);
  std::string out = "k,omega,gain\n";
  for (std::size_t k = 0; k < t; ++k) {
    out += std::to_string(k) + "," + format_double(bin_frequency(k, t)) + "," + format_double(g[k]) + "\n";
  }
  return out;
}

Matrix ring_laplacian(std::size_t t) {
  if (t < 3) throw InputError("ring graph needs T >= 3");
  Matrix l(t, t);
  for (std::size_t i = 0; i < t; ++i) {
    l(i, i) = 2.0;
    l(i, (i + 1) % t) = -1.0;
    l((i + 1) % t, i) = -1.0;
  }
  return l;
}

SpectralBasis ring_graph_basis(std::size_t t) { return spectral_basis(ring_laplacian(t)); }

double ring_eigenvalue(std::size_t k, std::size_t t) {
  return 2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k % t) / static_cast<double>(t));
}

double dft_span_residual(const SpectralBasis& basis) {
  const std::size_t t = basis.size();
  double worst = 0.0;
  for (std::size_t col = 0; col < t; ++col) {
    const double lambda = basis.eigenvalues[col];
    // Orthonormal basis of the analytic eigenspace, by Gram-Schmidt.
    std::vector<std::vector<double>> span;
    auto add = [&](std::vector<double> v) {
      for (const auto& q : span) {
        double d = 0.0;
        for (std::size_t i = 0; i < t; ++i) d += q[i] * v[i];
        for (std::size_t i = 0; i < t; ++i) v[i] -= d * q[i];
      }
      double n = 0.0;
      for (double x : v) n += x * x;
      if (n < 1e-12) return;
      for (double& x : v) x /= std::sqrt(n);
      span.push_back(std::move(v));
    };
    for (std::size_t k = 0; k <= t / 2; ++k) {
      if (std::abs(ring_eigenvalue(k, t) - lambda) > 1e-6) continue;
      std::vector<double> c(t), s(t);
      for (std::size_t i = 0; i < t; ++i) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>((k * i) % t) / static_cast<double>(t);
        c[i] = std::cos(angle);
        s[i] = std::sin(angle);
      }
      add(std::move(c));
      add(std::move(s));
    }
    std::vector<double> u(t);
    for (std::size_t i = 0; i < t; ++i) u[i] = basis.eigenvectors(i, col);
    std::vector<double> r = u;
    for (const auto& q : span) {
      double d = 0.0;
      for (std::size_t i = 0; i < t; ++i) d += q[i] * u[i];
      for (std::size_t i = 0; i < t; ++i) r[i] -= d * q[i];
    }
    double n = 0.0;
    for (double x : r) n += x * x;
    worst = std::max(worst, std::sqrt(n));
  }
  return worst;
}

}  // namespace specrec
