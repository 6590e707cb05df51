// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "specrec/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>

#include "specrec/errors.hpp"
#include "specrec/io.hpp"
#include "specrec/parallel.hpp"

namespace specrec {

CooccurrenceGraph CooccurrenceGraph::from_edges(std::size_t n_items, std::span<const WeightedEdge> edges) {
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(n_items);
  for (const auto& e : edges) {
    if (e.i >= n_items || e.j >= n_items) throw InputError("graph: edge endpoint out of range");
    if (!std::isfinite(e.weight) || e.weight < 0.0) throw InputError("graph: edge weight must be finite and nonnegative");
    if (e.i == e.j || e.weight == 0.0) continue;
    adj[e.i].push_back({e.j, e.weight});
    adj[e.j].push_back({e.i, e.weight});
  }
  CooccurrenceGraph g;
  g.degrees_.assign(n_items, 0.0);
  g.inv_sqrt_deg_.assign(n_items, 0.0);
  g.row_ptr_.assign(1, 0);
  for (std::size_t i = 0; i < n_items; ++i) {
    auto& row = adj[i];
    std::sort(row.begin(), row.end());
    for (std::size_t k = 0; k < row.size();) {
      std::size_t j = row[k].first;
      double w = 0.0;
      for (; k < row.size() && row[k].first == j; ++k) w += row[k].second;
      g.cols_.push_back(j);
      g.values_.push_back(w);
      g.degrees_[i] += w;
    }
    g.row_ptr_.push_back(g.cols_.size());
    if (g.degrees_[i] > 0.0) g.inv_sqrt_deg_[i] = 1.0 / std::sqrt(g.degrees_[i]);
  }
  return g;
}

CooccurrenceGraph CooccurrenceGraph::from_dense(const Matrix& w) {
  if (w.rows() != w.cols()) throw InputError("graph: adjacency must be square");
  std::vector<WeightedEdge> edges;
  for (std::size_t i = 0; i < w.rows(); ++i) {
    for (std::size_t j = i + 1; j < w.cols(); ++j) {
      if (w(i, j) != w(j, i)) throw InputError("graph: adjacency must be symmetric");
      if (w(i, j) != 0.0) edges.push_back({i, j, w(i, j)});
    }
  }
  return from_edges(w.rows(), edges);
}

double CooccurrenceGraph::weight(std::size_t i, std::size_t j) const {
  if (i >= n_items() || j >= n_items()) throw InputError("graph: item index out of range");
  const auto first = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
  const auto last = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - cols_.begin())];
}

std::vector<WeightedEdge> CooccurrenceGraph::edges() const {
  std::vector<WeightedEdge> out;
  out.reserve(nnz());
  for (std::size_t i = 0; i < n_items(); ++i)
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      if (cols_[k] > i) out.push_back({i, cols_[k], values_[k]});
  return out;
}

Matrix CooccurrenceGraph::apply_laplacian(const Matrix& e, std::size_t workers) const {
  if (e.rows() != n_items()) {
    throw InputError("apply_laplacian: signal has " + std::to_string(e.rows()) + " rows, graph has " +
                     std::to_string(n_items()) + " nodes");
  }
  const std::size_t d = e.cols();
  Matrix out(e.rows(), d);
  const std::size_t block = 16;
  const std::size_t blocks = (d + block - 1) / block;
  parallel_for(blocks, workers, [&](std::size_t b) {
    const std::size_t c0 = b * block;
    const std::size_t c1 = std::min(d, c0 + block);
    for (std::size_t i = 0; i < n_items(); ++i) {
      for (std::size_t c = c0; c < c1; ++c) out(i, c) = e(i, c);
      const double si = inv_sqrt_deg_[i];
      if (si == 0.0) continue;
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        const std::size_t j = cols_[k];
        const double w = si * values_[k] * inv_sqrt_deg_[j];
        for (std::size_t c = c0; c < c1; ++c) out(i, c) -= w * e(j, c);
      }
    }
  });
  return out;
}

Matrix CooccurrenceGraph::dense_adjacency() const {
  Matrix w(n_items(), n_items());
  for (std::size_t i = 0; i < n_items(); ++i)
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) w(i, cols_[k]) = values_[k];
  return w;
}

Matrix CooccurrenceGraph::dense_laplacian() const { return normalized_laplacian(dense_adjacency()); }

nlohmann::json CooccurrenceGraph::header() const {
  return {{"format", "specrec-graph-v1"},
          {"n_items", n_items()},
          {"nnz", nnz()},
          {"provenance", provenance_},
          {"meta", meta_}};
}

CooccurrenceGraph build_cooccurrence(const SplitDataset& split, bool binarize) {
  if (split.n_users() == 0) throw InputError("build_cooccurrence: split has no training sequences");
  std::unordered_map<std::uint64_t, double> pairs;
  for (std::size_t u = 0; u < split.n_users(); ++u) {
    std::map<std::size_t, double> counts;
    for (std::size_t i : split.train(u)) counts[i] += 1.0;
    for (auto a = counts.begin(); a != counts.end(); ++a) {
      for (auto b = std::next(a); b != counts.end(); ++b) {
        const double w = binarize ? 1.0 : a->second * b->second;
        pairs[(static_cast<std::uint64_t>(a->first) << 32) | b->first] += w;
      }
    }
  }
  std::vector<WeightedEdge> edges;
  edges.reserve(pairs.size());
  for (const auto& [key, w] : pairs) edges.push_back({static_cast<std::size_t>(key >> 32), static_cast<std::size_t>(key & 0xffffffffU), w});
  auto g = CooccurrenceGraph::from_edges(split.n_items(), edges);
  g.provenance() = split.fingerprint() + (binarize ? ":binary" : ":counts");
  return g;
}

std::string graph_to_text(const CooccurrenceGraph& g) {
  std::string out = g.header().dump() + "\n";
  for (const auto& e : g.edges()) {
    out += std::to_string(e.i);
    out += '\t';
    out += std::to_string(e.j);
    out += '\t';
    out += format_double(e.weight);
    out += '\n';
  }
  return out;
}

CooccurrenceGraph graph_from_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InputError(origin + ": empty graph file");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(origin, 1, std::string("bad graph header: ") + e.what());
  }
  if (header.value("format", "") != "specrec-graph-v1") throw ParseError(origin, 1, "not a specrec graph file");
  const auto n = header.at("n_items").get<std::size_t>();
  const auto nnz = header.at("nnz").get<std::size_t>();
  std::vector<WeightedEdge> edges;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string a, b, w;
    if (!std::getline(fields, a, '\t') || !std::getline(fields, b, '\t') || !std::getline(fields, w, '\t')) {
      throw ParseError(origin, lineno, "expected i, j, weight");
    }
    WeightedEdge e;
    try {
      e = {std::stoul(a), std::stoul(b), std::stod(w)};
    } catch (const std::exception&) {
      throw ParseError(origin, lineno, "unparsable edge");
    }
    edges.push_back(e);
  }
  if (edges.size() != nnz) throw InputError(origin + ": header nnz " + std::to_string(nnz) + " but " + std::to_string(edges.size()) + " edges");
  auto g = CooccurrenceGraph::from_edges(n, edges);
  g.provenance() = header.value("provenance", "");
  g.meta() = header.value("meta", nlohmann::json::object());
  return g;
}

void save_graph(const CooccurrenceGraph& g, const std::filesystem::path& path) { write_text_file(path, graph_to_text(g)); }

CooccurrenceGraph load_graph(const std::filesystem::path& path) {
  return graph_from_text(read_text_file(path), path.string());
}

Matrix normalized_laplacian(const Matrix& a) {
  const std::size_t n = a.rows();
  std::vector<double> s(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < n; ++j) d += a(i, j);
    s[i] = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
  }
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) l(i, j) = (i == j ? 1.0 : 0.0) - s[i] * a(i, j) * s[j];
  return l;
}

Matrix combinatorial_laplacian(const Matrix& a) {
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      l(i, j) -= a(i, j);
      l(i, i) += a(i, j);
    }
  }
  return l;
}

bool LocalGraph::degenerate() const {
  return std::all_of(adjacency.data().begin(), adjacency.data().end(), [](double v) { return v == 0.0; });
}

LocalGraph local_subgraph(const CooccurrenceGraph& g, std::span<const std::size_t> items) {
  if (items.size() < 2) throw InputError("local_subgraph: need at least 2 target items, got " + std::to_string(items.size()));
  LocalGraph lg;
  lg.items.assign(items.begin(), items.end());
  const std::size_t t = items.size();
  lg.adjacency = Matrix(t, t);
  for (std::size_t s = 0; s < t; ++s)
    for (std::size_t r = s + 1; r < t; ++r) lg.adjacency(s, r) = lg.adjacency(r, s) = g.weight(items[s], items[r]);
  lg.laplacian = normalized_laplacian(lg.adjacency);
  return lg;
}

}  // namespace specrec
