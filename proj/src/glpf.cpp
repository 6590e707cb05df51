// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "specrec/glpf.hpp"

#include <cmath>
#include <exception>

#include "specrec/eigen.hpp"
#include "specrec/io.hpp"

namespace specrec {

PolyFilterSpec PolyFilterSpec::first_order(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw InputError("glpf: alpha must lie in [0, 1], got " + format_double(alpha));
  }
  return {{1.0, -alpha}};
}

double PolyFilterSpec::response(double lambda) const {
  double h = 0.0;
  for (auto it = theta.rbegin(); it != theta.rend(); ++it) h = h * lambda + *it;
  return h;
}

Matrix polynomial_filter(const CooccurrenceGraph& graph, const PolyFilterSpec& spec, const Matrix& e,
                         std::size_t workers) {
  if (spec.theta.empty()) throw InputError("glpf: empty coefficient list");
  for (double t : spec.theta) {
    if (!std::isfinite(t)) throw InputError("glpf: non-finite filter coefficient");
  }
  if (e.rows() != graph.n_items()) {
    throw InputError("glpf: embedding table has " + std::to_string(e.rows()) + " rows, graph has " +
                     std::to_string(graph.n_items()) + " items");
  }
  const auto& theta = spec.theta;
  Matrix acc = e;
  acc *= theta.back();
  for (std::size_t k = theta.size() - 1; k-- > 0;) {
    acc = graph.apply_laplacian(acc, workers);
    if (theta[k] != 0.0) {
      for (std::size_t i = 0; i < acc.size(); ++i) acc.data()[i] += theta[k] * e.data()[i];
    }
  }
  return acc;
}

Matrix spectral_oracle_filter(const SpectralBasis& basis, const FrequencyResponse& h, const Matrix& e) {
  Matrix coeffs = gft(basis, e);
  const std::size_t n = basis.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double g = h(basis.eigenvalues[k], k, n);
    for (double& v : coeffs.row(k)) v *= g;
  }
  return gft(basis, coeffs, Direction::kInverse);
}

Matrix spectral_oracle_filter(const CooccurrenceGraph& graph, const FrequencyResponse& h, const Matrix& e) {
  if (graph.n_items() > kMaxDenseEigenSize) {
    throw CapabilityError("spectral oracle needs a dense eigendecomposition; " + std::to_string(graph.n_items()) +
                          " items exceeds " + std::to_string(kMaxDenseEigenSize) + ", use polynomial_filter");
  }
  if (e.rows() != graph.n_items()) throw InputError("spectral oracle: embedding rows do not match graph size");
  return spectral_oracle_filter(spectral_basis(graph.dense_laplacian()), h, e);
}

FrequencyResponse truncation_response(double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw InputError("truncation fraction must lie in [0, 1], got " + format_double(fraction));
  }
  return [fraction](double, std::size_t rank, std::size_t n) {
    const auto keep = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
    return rank < keep ? 1.0 : 0.0;
  };
}

TruncationSweepError::TruncationSweepError(double fraction, const std::string& what)
    : EvaluationError("truncation sweep failed at p=" + format_double(fraction) + ": " + what), fraction_(fraction) {}

std::vector<SweepRow> truncation_sweep(const CooccurrenceGraph& graph, const Matrix& e,
                                       std::span<const double> fractions,
                                       const std::function<double(const Matrix&)>& metric) {
  if (graph.n_items() > kMaxDenseEigenSize) {
    throw CapabilityError("truncation sweep needs an oracle-sized graph (at most " +
                          std::to_string(kMaxDenseEigenSize) + " items)");
  }
  if (e.rows() != graph.n_items()) throw InputError("truncation sweep: embedding rows do not match graph size");
  const SpectralBasis basis = spectral_basis(graph.dense_laplacian());
  std::vector<SweepRow> rows;
  for (double p : fractions) {
    const Matrix filtered = spectral_oracle_filter(basis, truncation_response(p), e);
    try {
      rows.push_back({p, metric(filtered)});
    } catch (const std::exception& ex) {
      throw TruncationSweepError(p, ex.what());
    }
  }
  return rows;
}

std::string sweep_csv(std::span<const SweepRow> rows, const std::string& key) {
  std::string out = key + ",metric\n";
  for (const auto& r : rows) out += format_double(r.fraction) + "," + format_double(r.metric) + "\n";
  return out;
}

}  // namespace specrec
