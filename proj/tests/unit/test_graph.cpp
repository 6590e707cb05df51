// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>
#include <numeric>
#include <set>

#include "doctest.h"
#include "specrec/eigen.hpp"
#include "specrec/errors.hpp"
#include "specrec/graph.hpp"
#include "specrec/spectral.hpp"
#include "test_support.hpp"

using namespace specrec;

namespace {

// Naive R^T R over training histories, diagonal zeroed.
Matrix naive_cooccurrence(const SplitDataset& split, bool binarize) {
  const std::size_t n = split.n_items();
  Matrix r(split.n_users(), n);
  for (std::size_t u = 0; u < split.n_users(); ++u)
    for (std::size_t i : split.train(u)) r(u, i) = binarize ? 1.0 : r(u, i) + 1.0;
  Matrix w = matmul_tn(r, r);
  for (std::size_t i = 0; i < n; ++i) w(i, i) = 0.0;
  return w;
}

SplitDataset random_split(std::mt19937_64& rng, std::size_t users, std::size_t items) {
  std::uniform_int_distribution<std::size_t> len(3, 12), item(0, items - 1);
  std::vector<std::vector<std::size_t>> seqs(users);
  for (auto& s : seqs) {
    s.resize(len(rng));
    for (auto& v : s) v = item(rng);
  }
  return SplitDataset::from_sequences(seqs, items);
}

Matrix random_weighted_graph(std::size_t n, std::mt19937_64& rng, double density = 0.4) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix w(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (unif(rng) < density) w(i, j) = w(j, i) = std::floor(1.0 + 5.0 * unif(rng));
  return w;
}

}  // namespace

TEST_CASE("hand-computed co-occurrence") {
  // R = [[1,1,0],[1,1,1]]; the trailing two items of each sequence are valid/test.
  const auto split = SplitDataset::from_sequences({{0, 1, 2, 2}, {0, 1, 2, 0, 0}}, 3);
  const auto g = build_cooccurrence(split);
  const Matrix expected{{0, 2, 1}, {2, 0, 1}, {1, 1, 0}};
  CHECK(g.dense_adjacency() == expected);
  CHECK(g.degrees() == std::vector<double>{3, 3, 2});
  CHECK(g.nnz() == 3);
}

TEST_CASE("single training item yields an empty graph") {
  const auto g = build_cooccurrence(SplitDataset::from_sequences({{0, 1, 2}}, 3));
  CHECK(g.nnz() == 0);
  for (double d : g.degrees()) CHECK(d == 0.0);
  // Isolated nodes: the Laplacian acts as the identity.
  const Matrix e{{1.0}, {2.0}, {3.0}};
  CHECK(g.apply_laplacian(e) == e);
}

TEST_CASE("co-occurrence equals brute-force pair counting on random logs") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const auto split = random_split(rng, 8, 10);
    for (bool binarize : {true, false}) {
      const auto g = build_cooccurrence(split, binarize);
      const Matrix w = g.dense_adjacency();
      CHECK(w == naive_cooccurrence(split, binarize));
      CHECK(w == w.transpose());
    }
  }
}

TEST_CASE("sparse Laplacian sweep matches the dense operator and kills D^1/2 1") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto split = random_split(rng, 12, 25);
    const auto g = build_cooccurrence(split);
    const Matrix e = specrec::testing::random_matrix(25, 7, rng);
    CHECK(max_abs_diff(g.apply_laplacian(e, 2), matmul(g.dense_laplacian(), e)) < 1e-12);
    Matrix root(25, 1);
    for (std::size_t i = 0; i < 25; ++i) root(i, 0) = std::sqrt(g.degrees()[i]);
    const Matrix lr = g.apply_laplacian(root);
    // Isolated nodes have zero entries; everything else is annihilated.
    for (std::size_t i = 0; i < 25; ++i) CHECK(std::abs(lr(i, 0)) < 1e-10);
  }
}

TEST_CASE("graph file roundtrip") {
  std::mt19937_64 rng(8);
  const auto g = build_cooccurrence(random_split(rng, 10, 15));
  const std::string text = graph_to_text(g);
  const auto back = graph_from_text(text);
  CHECK(back.dense_adjacency() == g.dense_adjacency());
  CHECK(graph_to_text(back) == text);
  CHECK_THROWS_AS(graph_from_text("{\"format\":\"x\"}\n"), ParseError);
}

TEST_SUITE("local graphs") {
  const Matrix kW{{0, 2, 1}, {2, 0, 1}, {1, 1, 0}};

  TEST_CASE("distinct targets copy W") {
    const auto g = CooccurrenceGraph::from_dense(kW);
    const std::vector<std::size_t> items = {0, 1, 2};
    CHECK(local_subgraph(g, items).adjacency == kW);
  }

  TEST_CASE("a repeated item is two unlinked nodes") {
    const auto g = CooccurrenceGraph::from_dense(kW);
    const std::vector<std::size_t> items = {1, 1};
    const auto lg = local_subgraph(g, items);
    CHECK(lg.adjacency == Matrix(2, 2));
    CHECK(lg.laplacian == Matrix::identity(2));
    CHECK(lg.degenerate());
  }

  TEST_CASE("fewer than two targets is an input error") {
    const auto g = CooccurrenceGraph::from_dense(kW);
    const std::vector<std::size_t> one = {1};
    CHECK_THROWS_AS(local_subgraph(g, one), InputError);
  }

  TEST_CASE("normalized local spectra lie in [0, 2]") {
    std::mt19937_64 rng(12);
    const auto split = random_split(rng, 60, 40);
    const auto g = build_cooccurrence(split);
    std::uniform_int_distribution<std::size_t> len(2, 30), item(0, 39);
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<std::size_t> items(len(rng));
      for (auto& v : items) v = item(rng);
      const auto eig = sym_eigendecompose(local_subgraph(g, items).laplacian);
      CHECK(eig.values.front() >= -1e-9);
      CHECK(eig.values.back() <= 2.0 + 1e-9);
    }
  }

  TEST_CASE("relabeling items permutes local adjacency identically") {
    std::mt19937_64 rng(13);
    const std::size_t n = 20;
    const Matrix w = random_weighted_graph(n, rng);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix wp(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) wp(perm[i], perm[j]) = w(i, j);
    const auto g = CooccurrenceGraph::from_dense(w);
    const auto gp = CooccurrenceGraph::from_dense(wp);
    const std::vector<std::size_t> items = {3, 7, 7, 1, 19, 0};
    std::vector<std::size_t> relabeled;
    for (auto i : items) relabeled.push_back(perm[i]);
    CHECK(local_subgraph(g, items).adjacency == local_subgraph(gp, relabeled).adjacency);
  }

  TEST_CASE("quadratic form: edge sum equals eigen form") {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 2 + trial % 25;
      const Matrix w = random_weighted_graph(n, rng);
      const Matrix l = normalized_laplacian(w);
      const Matrix f = specrec::testing::random_matrix(n, 3, rng);
      std::vector<double> deg(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) deg[i] += w(i, j);
      double edge_form = 0.0;
      for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
          if (deg[i] == 0.0) {
            edge_form += f(i, c) * f(i, c);
            continue;
          }
          for (std::size_t j = 0; j < n; ++j) {
            if (w(i, j) == 0.0) continue;
            const double diff = f(i, c) / std::sqrt(deg[i]) - f(j, c) / std::sqrt(deg[j]);
            edge_form += 0.5 * w(i, j) * diff * diff;
          }
        }
      }
      const double eigen_form = spectral_smoothness(spectral_basis(l), f);
      CHECK(std::abs(edge_form - eigen_form) <= 1e-9 * std::max(1.0, std::abs(edge_form)));
    }
  }
}
