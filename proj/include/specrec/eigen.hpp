// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "specrec/matrix.hpp"

namespace specrec {

struct SymEigen {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column k pairs with values[k]
};

inline constexpr std::size_t kMaxDenseEigenSize = 1024;

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// The input is symmetrized by averaging with its transpose; an asymmetry
/// above 1e-9 (relative to the largest entry) is rejected. Eigenvalues come
/// back ascending with ties kept in diagonal order, and every eigenvector is
/// sign-normalized so its first non-negligible component is positive.
SymEigen sym_eigendecompose(const Matrix& m);

/// ||U diag(values) U^T - M||_F / ||M||_F.
double reconstruction_error(const SymEigen& eig, const Matrix& m);

}  // namespace specrec
