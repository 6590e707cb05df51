// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "specrec/dataset.hpp"
#include "specrec/matrix.hpp"

namespace specrec {

/// One row per item. provenance is "id", "text" or "external"; meta carries
/// free-form stamps (config hash, filter settings) and survives save/load.
struct EmbeddingTable {
  Matrix rows;
  std::string provenance = "id";
  nlohmann::json meta = nlohmann::json::object();

  std::size_t n_items() const noexcept { return rows.rows(); }
  std::size_t dim() const noexcept { return rows.cols(); }
  std::string content_hash() const;
  nlohmann::json header() const;
};

// File layout: one JSON header line, then n_items * dim little-endian f64.
void write_embeddings(const EmbeddingTable& table, std::ostream& out);
EmbeddingTable read_embeddings(std::istream& in, const std::string& origin = "<stream>");
void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path);
/// expected_dim = 0 accepts any width.
EmbeddingTable load_embeddings(const std::filesystem::path& path, std::size_t expected_dim = 0);

/// External vectors, either the table format above or text lines
/// "item_token<TAB>v1 v2 ... vd", aligned to the split vocabulary.
EmbeddingTable load_external(const std::filesystem::path& path, const SplitDataset& split, std::size_t expected_dim);

struct PretrainConfig {
  std::size_t dim = 50;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double lr = 0.025;
  std::uint64_t seed = 1;
};

struct PretrainResult {
  EmbeddingTable table;
  std::vector<double> epoch_loss;  // mean loss per (center, context) pair
};

/// Skip-gram with negative sampling over within-window pairs of the training
/// histories. Negatives follow the unigram^0.75 distribution. Rows are the
/// sum of each item's input and output vectors.
PretrainResult pretrain_id_embeddings(const SplitDataset& split, const PretrainConfig& config);

/// Feature-hashed token counts of each item's text, projected through a
/// seeded Gaussian matrix and scaled to unit length. Empty text maps to zero.
EmbeddingTable text_surrogate_embeddings(const SplitDataset& split, std::size_t d_text, std::uint64_t seed,
                                         std::size_t buckets = 4096);
std::vector<double> text_surrogate(const std::string& text, std::size_t d_text, std::uint64_t seed,
                                   std::size_t buckets = 4096);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

}  // namespace specrec
