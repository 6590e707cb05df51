// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "specrec/matrix.hpp"
#include "specrec/spectral.hpp"

namespace specrec {

/// Butterworth low-pass, |B(w)|^2 = 1 / (1 + (w / cutoff)^(2 order)), with w
/// normalized so that 1 is Nyquist.
struct ButterworthSpec {
  double cutoff = 0.3;
  int order = 2;

  void validate() const;
};

/// Normalized frequency of DFT bin k: 2 min(k, T-k) / T.
double bin_frequency(std::size_t k, std::size_t t);

/// Zero-phase magnitude gain per bin, sqrt of the squared response. Bins k and
/// T-k share a gain; bin 0 is exactly 1.
std::vector<double> butterworth_gains(const ButterworthSpec& spec, std::size_t t);

/// Filters each column of H along the row (time) axis. T = 1 is the identity.
Matrix tfm_apply(const Matrix& h, const ButterworthSpec& spec);

/// "k,omega,gain" table.
std::string gain_table_csv(const ButterworthSpec& spec, std::size_t t);

/// Combinatorial Laplacian of the T-node cycle and its eigenbasis (T >= 3).
Matrix ring_laplacian(std::size_t t);
SpectralBasis ring_graph_basis(std::size_t t);
/// 2 - 2 cos(2 pi k / T).
double ring_eigenvalue(std::size_t k, std::size_t t);

/// Largest distance from a numeric eigenvector to the span of the cos/sin DFT
/// vectors whose analytic eigenvalue matches its own.
double dft_span_residual(const SpectralBasis& basis);

}  // namespace specrec
