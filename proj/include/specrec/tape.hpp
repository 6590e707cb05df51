// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "specrec/matrix.hpp"

namespace specrec {

class Tape;

/// Handle to a recorded value. Cheap to copy; valid while its tape lives.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Matrix& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

struct ParamGradient {
  std::string name;
  std::size_t leaf_id = 0;
  Matrix grad;
};

struct Gradients {
  std::vector<ParamGradient> params;  // in leaf creation order
  std::vector<std::string> unreachable;

  const Matrix& of(Var leaf) const;
};

/// Records a forward pass over matrix primitives and replays it in reverse.
///
/// Node ids grow monotonically, so reverse id order is a valid topological
/// order. Nodes that depend on no trainable leaf carry no backward work:
/// frozen weights enter as constants and cost nothing on the way back.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var parameter(Matrix value, std::string name);
  Var constant(Matrix value);

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  std::size_t size() const noexcept { return nodes_.size(); }
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }

  /// Reverse sweep from a 1x1 loss. Every parameter gets a gradient of its
  /// own shape; parameters the loss never touched get zeros and are listed in
  /// Gradients::unreachable.
  Gradients backward(Var loss);

  // Low-level recording used by the op library.
  // parent_grads[i] is null when parent i needs no gradient.
  using BackwardFn = std::function<void(const Tape& tape, std::size_t self, const Matrix& upstream,
                                        std::span<Matrix* const> parent_grads)>;
  Var record(Matrix value, std::vector<Var> parents, BackwardFn backward);

 private:
  struct Node {
    Matrix value;
    std::vector<std::size_t> parents;
    BackwardFn backward;
    bool trainable = false;
    bool requires_grad = false;
    std::string name;
  };
  std::vector<Node> nodes_;
};

enum class Activation { kGelu, kIdentity };

// Op library. Every op checks shapes and throws InputError on mismatch.
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var add_row_bias(Var a, Var bias);  // bias is 1 x cols, broadcast over rows
Var scale(Var a, double s);
Var hadamard(Var a, Var b);
Var transpose(Var a);
Var activation(Var a, Activation kind);
Var softmax_rows(Var a, bool causal);
Var layer_norm_rows(Var a, Var gamma, Var beta, double eps = 1e-5);
Var slice_cols(Var a, std::size_t start, std::size_t count);
Var slice_rows(Var a, std::size_t start, std::size_t count);
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var gather_rows(Var a, std::span<const std::size_t> rows);
Var row_sums(Var a);
Var sum_squares(Var a);
/// Linear spectral multiplier along rows (per column DFT, gain, inverse DFT).
/// Its adjoint is itself because the gains are real and conjugate-symmetric.
Var spectral_filter(Var a, std::span<const double> gains);
/// Mean over rows of -log softmax(row)[targets[row]].
Var softmax_cross_entropy(Var logits, std::span<const std::size_t> targets);

double gelu(double x);
double gelu_derivative(double x);

// ---------------------------------------------------------------------------
// Finite-difference verification.

struct FiniteDifferenceEntry {
  std::string name;
  double max_relative_error = 0.0;
  std::size_t row = 0;
  std::size_t col = 0;
};

struct FiniteDifferenceReport {
  std::vector<FiniteDifferenceEntry> per_param;
  double worst = 0.0;
  std::string worst_param;
};

using LossFn = std::function<double(const std::vector<Matrix>& params)>;

/// Central differences (f(p+h) - f(p-h)) / 2h for every parameter entry,
/// compared against `analytic`. The entry error is |fd - g| divided by
/// max(|fd|, |g|, 1e-3 * largest |g| in that parameter); a parameter whose
/// gradients are all zero on both sides reports 0. The loss is evaluated
/// twice at the base point first: any difference is a ProtocolError.
FiniteDifferenceReport finite_difference_check(const LossFn& loss, const std::vector<Matrix>& params,
                                               const std::vector<Matrix>& analytic,
                                               const std::vector<std::string>& names, double step = 1e-5);

}  // namespace specrec
