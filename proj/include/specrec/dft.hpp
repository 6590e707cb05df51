// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <span>
#include <vector>

namespace specrec {

using Complex = std::complex<double>;
using ComplexSpectrum = std::vector<Complex>;

enum class Direction { kForward, kInverse };

// Forward: X[k] = sum_t x[t] exp(-j 2 pi k t / T), unnormalized.
// Inverse: x[t] = (1/T) sum_k X[k] exp(+j 2 pi k t / T).
// Power-of-two lengths run an iterative radix-2 FFT; everything else uses the
// direct O(T^2) sum.
ComplexSpectrum dft(std::span<const Complex> x, Direction dir);
ComplexSpectrum dft(std::span<const double> x, Direction dir = Direction::kForward);

// Always the direct sum, whatever the length. Reference path for tests.
ComplexSpectrum dft_direct(std::span<const Complex> x, Direction dir);

bool is_power_of_two(std::size_t n) noexcept;

}  // namespace specrec

namespace specrec {

class Matrix;

// Per column: forward DFT, multiply bin k by gains[k], inverse DFT. The gains
// must be conjugate-symmetric (gains[k] == gains[T-k]) so the output is real;
// an imaginary residue above 1e-10 (relative to the column scale) throws.
Matrix filter_columns(const Matrix& signal, std::span<const double> gains);

}  // namespace specrec
