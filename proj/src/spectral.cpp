// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "specrec/spectral.hpp"

#include <numeric>
#include <string>

#include "specrec/eigen.hpp"
#include "specrec/errors.hpp"

namespace specrec {

SpectralBasis spectral_basis(const Matrix& laplacian) {
  SymEigen eig = sym_eigendecompose(laplacian);
  return {std::move(eig.values), std::move(eig.vectors)};
}

Matrix gft(const SpectralBasis& basis, const Matrix& signal, Direction dir) {
  if (signal.rows() != basis.size()) {
    throw InputError("gft: signal has " + std::to_string(signal.rows()) + " rows, basis has " +
                     std::to_string(basis.size()) + " nodes");
  }
  return dir == Direction::kForward ? matmul_tn(basis.eigenvectors, signal) : matmul(basis.eigenvectors, signal);
}

double smoothness(const Matrix& laplacian, const Matrix& signal) {
  if (laplacian.rows() != signal.rows() || laplacian.cols() != signal.rows()) {
    throw InputError("smoothness: Laplacian and signal sizes differ");
  }
  const Matrix lf = matmul(laplacian, signal);
  double s = 0.0;
  for (std::size_t i = 0; i < lf.size(); ++i) s += lf.data()[i] * signal.data()[i];
  return s;
}

double spectral_smoothness(const SpectralBasis& basis, const Matrix& signal) {
  const auto energies = frequency_energies(gft(basis, signal));
  double s = 0.0;
  for (std::size_t k = 0; k < energies.size(); ++k) s += basis.eigenvalues[k] * energies[k];
  return s;
}

double rayleigh_quotient(const Matrix& laplacian, const Matrix& signal) {
  const double energy = squared_norm(signal);
  return energy == 0.0 ? 0.0 : smoothness(laplacian, signal) / energy;
}

std::vector<double> frequency_energies(const Matrix& coefficients) {
  std::vector<double> e(coefficients.rows(), 0.0);
  for (std::size_t k = 0; k < coefficients.rows(); ++k)
    for (double v : coefficients.row(k)) e[k] += v * v;
  return e;
}

double BandEnergy::total() const { return std::accumulate(energy.begin(), energy.end(), 0.0); }

std::size_t band_of_rank(std::size_t rank, std::size_t n, std::size_t n_bands) { return rank * n_bands / n; }

BandEnergy band_energy(const SpectralBasis& basis, const Matrix& coefficients, std::size_t n_bands) {
  const std::size_t n = basis.size();
  if (coefficients.rows() != n) throw InputError("band_energy: coefficient rows do not match the basis");
  if (n_bands == 0 || n_bands > n) {
    throw InputError("band_energy: need 1 <= bands <= " + std::to_string(n) + ", got " + std::to_string(n_bands));
  }
  BandEnergy out;
  out.n_bands = n_bands;
  out.energy.assign(n_bands, 0.0);
  out.band_start.assign(n_bands, n);
  const auto energies = frequency_energies(coefficients);
  for (std::size_t k = n; k-- > 0;) {
    const std::size_t b = band_of_rank(k, n, n_bands);
    out.energy[b] += energies[k];
    out.band_start[b] = k;
  }
  return out;
}

}  // namespace specrec
