// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "specrec/errors.hpp"
#include "specrec/glpf.hpp"
#include "test_support.hpp"

using namespace specrec;
using specrec::testing::random_adjacency;
using specrec::testing::random_matrix;

namespace {

double relative_gap(const Matrix& a, const Matrix& b) {
  return max_abs_diff(a, b) / std::max(1.0, frobenius_norm(b));
}

FrequencyResponse polynomial_response(const PolyFilterSpec& spec) {
  return [spec](double lambda, std::size_t, std::size_t) { return spec.response(lambda); };
}

}  // namespace

TEST_CASE("alpha = 0 leaves embeddings untouched") {
  std::mt19937_64 rng(1);
  const auto g = CooccurrenceGraph::from_dense(random_adjacency(30, rng));
  const Matrix e = random_matrix(30, 5, rng);
  CHECK(polynomial_filter(g, PolyFilterSpec::first_order(0.0), e) == e);
}

TEST_CASE("alpha = 1 flips the lambda = 2 eigenvector") {
  const auto g = CooccurrenceGraph::from_dense(Matrix{{0, 1}, {1, 0}});
  const double s = 1.0 / std::sqrt(2.0);
  const Matrix u{{s}, {-s}};
  const Matrix out = polynomial_filter(g, PolyFilterSpec::first_order(1.0), u);
  CHECK(out(0, 0) == doctest::Approx(-s).epsilon(1e-14));
  CHECK(out(1, 0) == doctest::Approx(s).epsilon(1e-14));
}

TEST_CASE("polynomial sweeps equal the dense spectral filter") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> coef(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 5 + 7 * static_cast<std::size_t>(trial);
    const auto g = CooccurrenceGraph::from_dense(random_adjacency(n, rng, 0.2));
    const Matrix e = random_matrix(n, 12, rng);
    const SpectralBasis basis = spectral_basis(g.dense_laplacian());
    for (double alpha : {0.0, 0.25, 0.5, 1.0}) {
      const auto spec = PolyFilterSpec::first_order(alpha);
      CHECK(relative_gap(polynomial_filter(g, spec, e, 2), spectral_oracle_filter(basis, polynomial_response(spec), e)) <
            1e-10);
    }
    const PolyFilterSpec cubic{{coef(rng), coef(rng), coef(rng), coef(rng)}};
    CHECK(relative_gap(polynomial_filter(g, cubic, e), spectral_oracle_filter(g, polynomial_response(cubic), e)) <
          1e-10);
  }
}

TEST_CASE("filter is linear") {
  std::mt19937_64 rng(3);
  const auto g = CooccurrenceGraph::from_dense(random_adjacency(40, rng));
  const Matrix a = random_matrix(40, 6, rng), b = random_matrix(40, 6, rng);
  const auto spec = PolyFilterSpec::first_order(0.3);
  Matrix mix = a;
  mix *= 2.5;
  Matrix tb = b;
  tb *= -1.5;
  mix += tb;
  Matrix expected = polynomial_filter(g, spec, a);
  expected *= 2.5;
  Matrix fb = polynomial_filter(g, spec, b);
  fb *= -1.5;
  expected += fb;
  CHECK(relative_gap(polynomial_filter(g, spec, mix), expected) < 1e-10);
}

TEST_CASE("first-order gains stay inside the unit interval in magnitude") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto basis = spectral_basis(normalized_laplacian(random_adjacency(25, rng)));
    for (double alpha = 0.0; alpha <= 1.0; alpha += 0.125) {
      const auto spec = PolyFilterSpec::first_order(alpha);
      for (double lambda : basis.eigenvalues) CHECK(std::abs(spec.response(lambda)) <= 1.0 + 1e-9);
    }
  }
}

TEST_CASE("oracle identity and truncation projector") {
  std::mt19937_64 rng(5);
  const auto g = CooccurrenceGraph::from_dense(random_adjacency(24, rng, 0.4));
  const Matrix e = random_matrix(24, 4, rng);
  const auto one = [](double, std::size_t, std::size_t) { return 1.0; };
  CHECK(max_abs_diff(spectral_oracle_filter(g, one, e), e) < 1e-12);

  const auto basis = spectral_basis(g.dense_laplacian());
  const Matrix half = spectral_oracle_filter(basis, truncation_response(0.5), e);
  const Matrix coeffs = gft(basis, half);
  for (std::size_t k = 12; k < 24; ++k)
    for (double v : coeffs.row(k)) CHECK(std::abs(v) < 1e-9);
  CHECK(max_abs_diff(spectral_oracle_filter(basis, truncation_response(0.5), half), half) < 1e-9);
}

TEST_CASE("truncation sweep endpoints, determinism and error propagation") {
  std::mt19937_64 rng(6);
  const auto g = CooccurrenceGraph::from_dense(random_adjacency(16, rng, 0.5));
  const Matrix e = random_matrix(16, 3, rng);
  const std::vector<double> fractions = {0.0, 0.5, 1.0, 1.0};
  const auto rows = truncation_sweep(g, e, fractions, [](const Matrix& m) { return frobenius_norm(m); });
  CHECK(rows[0].metric == 0.0);
  CHECK(rows[2].metric == doctest::Approx(frobenius_norm(e)).epsilon(1e-12));
  CHECK(rows[2].metric == rows[3].metric);
  CHECK(sweep_csv(std::span<const SweepRow>(rows).first(1)) == "p,metric\n0,0\n");

  try {
    truncation_sweep(g, e, fractions, [](const Matrix& m) -> double {
      if (frobenius_norm(m) > 0.0) throw std::runtime_error("boom");
      return 0.0;
    });
    FAIL("expected failure");
  } catch (const TruncationSweepError& ex) {
    CHECK(ex.fraction() == 0.5);
  }
}

TEST_CASE("glpf input validation") {
  const auto g = CooccurrenceGraph::from_dense(Matrix{{0, 1}, {1, 0}});
  CHECK_THROWS_AS(PolyFilterSpec::first_order(-0.1), InputError);
  CHECK_THROWS_AS(PolyFilterSpec::first_order(1.5), InputError);
  CHECK_THROWS_AS(polynomial_filter(g, PolyFilterSpec::first_order(0.3), Matrix(3, 2)), InputError);
  CHECK_THROWS_AS(truncation_response(1.2), InputError);
  const auto big = CooccurrenceGraph::from_edges(1100, {});
  const auto one = [](double, std::size_t, std::size_t) { return 1.0; };
  CHECK_THROWS_AS(spectral_oracle_filter(big, one, Matrix(1100, 1)), CapabilityError);
}
