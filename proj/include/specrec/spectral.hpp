// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "specrec/dft.hpp"
#include "specrec/matrix.hpp"

namespace specrec {

struct SpectralBasis {
  std::vector<double> eigenvalues;  // ascending
  Matrix eigenvectors;              // orthonormal columns

  std::size_t size() const noexcept { return eigenvalues.size(); }
};

SpectralBasis spectral_basis(const Matrix& laplacian);

/// Forward: U^T F. Inverse: U F.
Matrix gft(const SpectralBasis& basis, const Matrix& signal, Direction dir = Direction::kForward);

/// trace(F^T L F).
double smoothness(const Matrix& laplacian, const Matrix& signal);
/// sum_k lambda_k ||row k of U^T F||^2; equals smoothness() for the same L.
double spectral_smoothness(const SpectralBasis& basis, const Matrix& signal);
/// smoothness / ||F||_F^2; 0 for the zero signal.
double rayleigh_quotient(const Matrix& laplacian, const Matrix& signal);

/// Squared norm of each coefficient row.
std::vector<double> frequency_energies(const Matrix& coefficients);

struct BandEnergy {
  std::size_t n_bands = 0;
  std::vector<double> energy;           // per band
  std::vector<std::size_t> band_start;  // first frequency rank of each band

  double total() const;
};

/// Band of the frequency at ascending rank `rank` among n: floor(rank * bands / n).
std::size_t band_of_rank(std::size_t rank, std::size_t n, std::size_t n_bands);

/// Groups frequencies into n_bands contiguous eigenvalue-rank quantiles (ties
/// resolved by ascending index, which is the eigensolver's output order) and
/// sums the energy of each group.
BandEnergy band_energy(const SpectralBasis& basis, const Matrix& coefficients, std::size_t n_bands = 4);

}  // namespace specrec
