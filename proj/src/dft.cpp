// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "specrec/dft.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "specrec/errors.hpp"

namespace specrec {
namespace {

// exp(sign * j 2 pi m / n), reduced mod n so large products stay accurate.
Complex twiddle(std::size_t m, std::size_t n, double sign) {
  const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(m % n) / static_cast<double>(n);
  return {std::cos(angle), std::sin(angle)};
}

void fft_radix2(ComplexSpectrum& a, double sign) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  std::vector<Complex> table(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) table[k] = twiddle(k, n, sign);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const Complex w = table[k * stride];
        const Complex u = a[start + k];
        const Complex v = a[start + k + half] * w;
        a[start + k] = u + v;
        a[start + k + half] = u - v;
      }
    }
  }
}

}  // namespace

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

ComplexSpectrum dft_direct(std::span<const Complex> x, Direction dir) {
  const std::size_t n = x.size();
  if (n == 0) throw InputError("dft: empty input");
  const double sign = dir == Direction::kForward ? -1.0 : 1.0;
  std::vector<Complex> table(n);
  for (std::size_t m = 0; m < n; ++m) table[m] = twiddle(m, n, sign);
  ComplexSpectrum out(n);
  for (std::size_t k = 0; k < n; ++k) {
    Complex acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) acc += x[t] * table[(k * t) % n];
    out[k] = acc;
  }
  if (dir == Direction::kInverse) {
    for (auto& v : out) v /= static_cast<double>(n);
  }
  return out;
}

ComplexSpectrum dft(std::span<const Complex> x, Direction dir) {
  const std::size_t n = x.size();
  if (n == 0) throw InputError("dft: empty input");
  if (!is_power_of_two(n)) return dft_direct(x, dir);
  ComplexSpectrum a(x.begin(), x.end());
  fft_radix2(a, dir == Direction::kForward ? -1.0 : 1.0);
  if (dir == Direction::kInverse) {
    for (auto& v : a) v /= static_cast<double>(n);
  }
  return a;
}

ComplexSpectrum dft(std::span<const double> x, Direction dir) {
  ComplexSpectrum c(x.begin(), x.end());
  return dft(std::span<const Complex>(c), dir);
}

}  // namespace specrec

#include <algorithm>
#include <string>

#include "specrec/matrix.hpp"

namespace specrec {

Matrix filter_columns(const Matrix& signal, std::span<const double> gains) {
  const std::size_t t_len = signal.rows();
  if (gains.size() != t_len) {
    throw InputError("filter_columns: " + std::to_string(gains.size()) + " gains for " + std::to_string(t_len) +
                     " rows");
  }
  Matrix out(t_len, signal.cols());
  if (t_len == 0) return out;
  ComplexSpectrum column(t_len);
  for (std::size_t c = 0; c < signal.cols(); ++c) {
    double scale = 0.0;
    for (std::size_t t = 0; t < t_len; ++t) {
      column[t] = signal(t, c);
      scale = std::max(scale, std::abs(signal(t, c)));
    }
    ComplexSpectrum spec = dft(std::span<const Complex>(column), Direction::kForward);
    for (std::size_t k = 0; k < t_len; ++k) spec[k] *= gains[k];
    const ComplexSpectrum back = dft(std::span<const Complex>(spec), Direction::kInverse);
    for (std::size_t t = 0; t < t_len; ++t) {
      if (std::abs(back[t].imag()) > 1e-10 * std::max(scale, 1.0)) {
        throw NumericError("filter_columns: imaginary residue " + std::to_string(back[t].imag()) +
                           " at row " + std::to_string(t) + "; gains not conjugate-symmetric?");
      }
      out(t, c) = back[t].real();
    }
  }
  return out;
}

}  // namespace specrec
