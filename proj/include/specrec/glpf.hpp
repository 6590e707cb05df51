// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "specrec/errors.hpp"
#include "specrec/graph.hpp"
#include "specrec/matrix.hpp"
#include "specrec/spectral.hpp"

namespace specrec {

/// h(lambda) = sum_k theta[k] lambda^k.
struct PolyFilterSpec {
  std::vector<double> theta{1.0};

  /// theta = (1, -alpha); alpha must lie in [0, 1].
  static PolyFilterSpec first_order(double alpha);

  std::size_t order() const noexcept { return theta.empty() ? 0 : theta.size() - 1; }
  double response(double lambda) const;
};

/// E' = sum_k theta_k L^k E by Horner's rule: K sparse Laplacian sweeps,
/// L^k is never formed.
Matrix polynomial_filter(const CooccurrenceGraph& graph, const PolyFilterSpec& spec, const Matrix& e,
                         std::size_t workers = 1);

/// Gain for the frequency with eigenvalue `lambda` at ascending rank `rank` of n.
using FrequencyResponse = std::function<double(double lambda, std::size_t rank, std::size_t n)>;

/// U diag(h) U^T E with a dense eigendecomposition; n is capped at 1024.
Matrix spectral_oracle_filter(const CooccurrenceGraph& graph, const FrequencyResponse& h, const Matrix& e);
Matrix spectral_oracle_filter(const SpectralBasis& basis, const FrequencyResponse& h, const Matrix& e);

/// Keeps the floor(p * n) lowest-ranked frequencies.
FrequencyResponse truncation_response(double fraction);

struct SweepRow {
  double fraction = 0.0;
  double metric = 0.0;
};

class TruncationSweepError : public EvaluationError {
 public:
  TruncationSweepError(double fraction, const std::string& what);
  double fraction() const noexcept { return fraction_; }

 private:
  double fraction_;
};

/// For each fraction: hard-truncate E to its lowest frequencies, hand the
/// result to `metric`, record the value.
std::vector<SweepRow> truncation_sweep(const CooccurrenceGraph& graph, const Matrix& e,
                                       std::span<const double> fractions,
                                       const std::function<double(const Matrix&)>& metric);

/// "p,metric" header plus one line per row.
std::string sweep_csv(std::span<const SweepRow> rows, const std::string& key = "p");

}  // namespace specrec
