// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>

#include "specrec/matrix.hpp"

namespace specrec::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> dist(0.0, sd);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = dist(rng);
  return m;
}

inline Matrix random_symmetric(std::size_t n, std::mt19937_64& rng) {
  Matrix a = random_matrix(n, n, rng);
  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return s;
}

// Symmetric weights in (0, 1] on a random edge subset, zero diagonal.
inline Matrix random_adjacency(std::size_t n, std::mt19937_64& rng, double density = 0.3) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix w(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (unif(rng) < density) w(i, j) = w(j, i) = 1.0 - unif(rng);
  return w;
}

// Combinatorial Laplacian of the T-node cycle.
inline Matrix ring_laplacian(std::size_t t) {
  Matrix l(t, t);
  for (std::size_t i = 0; i < t; ++i) {
    l(i, i) += 2.0;
    l(i, (i + 1) % t) -= 1.0;
    l(i, (i + t - 1) % t) -= 1.0;
  }
  return l;
}

}  // namespace specrec::testing
