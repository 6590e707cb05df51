// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "specrec/dataset.hpp"
#include "specrec/matrix.hpp"

namespace specrec {

struct WeightedEdge {
  std::size_t i = 0;
  std::size_t j = 0;
  double weight = 0.0;
};

/// Item co-occurrence graph W = R^T R with a zeroed diagonal, stored as CSR
/// with both triangles. The normalized Laplacian I - D^-1/2 W D^-1/2 is only
/// ever applied, never formed, except through dense_laplacian() for oracles.
/// Isolated items use D^-1/2 = 0, which makes their Laplacian row an identity
/// row.
class CooccurrenceGraph {
 public:
  CooccurrenceGraph() = default;
  /// Edges with i == j are ignored; (i, j) and (j, i) are merged by summing.
  static CooccurrenceGraph from_edges(std::size_t n_items, std::span<const WeightedEdge> edges);
  static CooccurrenceGraph from_dense(const Matrix& w);

  std::size_t n_items() const noexcept { return degrees_.size(); }
  /// Number of stored undirected edges (i < j).
  std::size_t nnz() const noexcept { return values_.size() / 2; }
  const std::vector<double>& degrees() const noexcept { return degrees_; }
  double weight(std::size_t i, std::size_t j) const;
  std::vector<WeightedEdge> edges() const;  // i < j, row-major order

  /// L E for an n_items x d matrix, one sparse sweep.
  Matrix apply_laplacian(const Matrix& e, std::size_t workers = 1) const;
  Matrix dense_adjacency() const;
  Matrix dense_laplacian() const;

  nlohmann::json header() const;
  std::string& provenance() { return provenance_; }
  const std::string& provenance() const { return provenance_; }
  /// Free-form stamps carried through save/load.
  nlohmann::json& meta() { return meta_; }
  const nlohmann::json& meta() const { return meta_; }

 private:
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> cols_;
  std::vector<double> values_;
  std::vector<double> degrees_;
  std::vector<double> inv_sqrt_deg_;
  std::string provenance_;
  nlohmann::json meta_ = nlohmann::json::object();
};

/// W_ij counts users whose training history holds both i and j (set
/// membership when binarize is set; otherwise products of per-user counts).
CooccurrenceGraph build_cooccurrence(const SplitDataset& split, bool binarize = true);

// One JSON header line, then "i\tj\tweight" per undirected edge.
void save_graph(const CooccurrenceGraph& g, const std::filesystem::path& path);
CooccurrenceGraph load_graph(const std::filesystem::path& path);
std::string graph_to_text(const CooccurrenceGraph& g);
CooccurrenceGraph graph_from_text(const std::string& text, const std::string& origin = "<memory>");

Matrix normalized_laplacian(const Matrix& adjacency);
Matrix combinatorial_laplacian(const Matrix& adjacency);

struct LocalGraph {
  std::vector<std::size_t> items;  // node t holds items[t]; repeats are distinct nodes
  Matrix adjacency;
  Matrix laplacian;  // symmetric normalized

  std::size_t size() const noexcept { return items.size(); }
  bool degenerate() const;  // no edge at all
};

/// Dense local graph over an ordered item list, weights copied from W.
LocalGraph local_subgraph(const CooccurrenceGraph& g, std::span<const std::size_t> items);

}  // namespace specrec
