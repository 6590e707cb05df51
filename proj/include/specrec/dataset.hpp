// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "specrec/matrix.hpp"

namespace specrec {

struct Interaction {
  std::string user;
  std::string item;
  std::int64_t timestamp = 0;
  std::string text;  // optional item metadata

  friend bool operator==(const Interaction&, const Interaction&) = default;
};

/// Deduplicated interactions in canonical (user, timestamp, item) order.
class InteractionLog {
 public:
  InteractionLog() = default;
  /// Canonicalizes: drops repeated (user, item, timestamp) triples and sorts.
  explicit InteractionLog(std::vector<Interaction> events);

  const std::vector<Interaction>& events() const noexcept { return events_; }
  std::size_t size() const noexcept { return events_.size(); }
  bool empty() const noexcept { return events_.empty(); }

  friend bool operator==(const InteractionLog&, const InteractionLog&) = default;

 private:
  std::vector<Interaction> events_;
};

enum class LogFormat { kTsv, kJsonLines };

LogFormat parse_log_format(const std::string& name);

// TSV: user \t item \t timestamp [\t text], no header.
// JSON-lines: {"user": .., "item": .., "ts": .., "text": ..}.
InteractionLog ingest(const std::filesystem::path& path, LogFormat format);
InteractionLog parse_log(const std::string& content, LogFormat format, const std::string& origin = "<memory>");
void write_log_tsv(const InteractionLog& log, const std::filesystem::path& path);
std::string log_to_tsv(const InteractionLog& log);

enum class Phase { kValid, kTest };

struct UserSequence {
  std::size_t user = 0;
  std::vector<std::size_t> items;  // chronological
};

struct FilterStep {
  std::size_t iteration = 0;
  std::size_t users = 0;
  std::size_t items = 0;
  std::size_t interactions = 0;
};

struct DatasetStats {
  std::size_t users = 0;
  std::size_t items = 0;
  std::size_t interactions = 0;
  double average_length = 0.0;
};

/// Filtered, indexed sequences with leave-one-out views: the last item is the
/// test target, the second-to-last the validation target, the rest training.
class SplitDataset {
 public:
  SplitDataset() = default;

  std::size_t n_users() const noexcept { return sequences_.size(); }
  std::size_t n_items() const noexcept { return item_tokens_.size(); }
  std::size_t max_seq_len() const noexcept { return max_seq_len_; }
  std::size_t min_interactions() const noexcept { return min_interactions_; }

  const std::vector<UserSequence>& sequences() const noexcept { return sequences_; }
  const std::vector<std::string>& user_tokens() const noexcept { return user_tokens_; }
  const std::vector<std::string>& item_tokens() const noexcept { return item_tokens_; }
  const std::vector<std::string>& item_texts() const noexcept { return item_texts_; }
  const std::vector<FilterStep>& filter_trace() const noexcept { return trace_; }

  /// Full training part (all but the last two items).
  std::span<const std::size_t> train(std::size_t user) const;
  std::size_t valid_target(std::size_t user) const;
  std::size_t test_target(std::size_t user) const;
  /// Items visible when predicting the phase's target.
  std::span<const std::size_t> history(std::size_t user, Phase phase) const;
  /// history() cut to its most recent max_seq_len items; what models consume.
  std::span<const std::size_t> model_input(std::size_t user, Phase phase) const;
  std::size_t target(std::size_t user, Phase phase) const;
  /// Sorted distinct items of the full sequence (train, valid and test).
  std::vector<std::size_t> interacted(std::size_t user) const;

  DatasetStats stats() const;
  nlohmann::json summary_json() const;

  nlohmann::json to_json() const;
  static SplitDataset from_json(const nlohmann::json& j);
  /// Content hash over tokens, texts and sequences.
  std::string fingerprint() const;

  /// Builds a split directly from indexed sequences (tests and synthetic use).
  static SplitDataset from_sequences(std::vector<std::vector<std::size_t>> sequences, std::size_t n_items,
                                     std::size_t max_seq_len = 50);

 private:
  friend SplitDataset build_split(const InteractionLog&, std::size_t, std::size_t);

  std::vector<std::string> user_tokens_;
  std::vector<std::string> item_tokens_;
  std::vector<std::string> item_texts_;
  std::vector<UserSequence> sequences_;
  std::vector<FilterStep> trace_;
  std::size_t min_interactions_ = 5;
  std::size_t max_seq_len_ = 50;
};

/// Drops users and items below `min_interactions` repeatedly until nothing
/// changes, then indexes survivors in token order. Sequences are ordered by
/// timestamp with ties broken by item token.
SplitDataset build_split(const InteractionLog& log, std::size_t min_interactions = 5, std::size_t max_seq_len = 50);

void save_split(const SplitDataset& split, const std::filesystem::path& path);
SplitDataset load_split(const std::filesystem::path& path);

struct SynthConfig {
  std::size_t users = 200;
  std::size_t items = 100;
  double mean_length = 20.0;
  double rho = 0.5;
  std::uint64_t seed = 1;
  bool with_text = true;
};

struct SyntheticData {
  InteractionLog log;
  Matrix affinity;  // items x items, zero diagonal
};

/// Locality-controlled generator. Each user follows a stationary Gaussian
/// AR(1) walk z' = rho z + sqrt(1 - rho^2) e, and the item at each step is the
/// quantile bucket of z among `items` equal-probability buckets. Positions
/// |i-j| apart are correlated as rho^|i-j|, so temporally close items are
/// close in the catalog. The affinity is the Gaussian-copula density of a
/// one-step pair evaluated at the bucket midpoints.
SyntheticData synthesize(const SynthConfig& config);

/// Each user walks s, s+1, s+2, ... (mod items) from a seeded start, so the
/// next item is a fixed function of the current one.
InteractionLog synthesize_successor(std::size_t users, std::size_t items, std::size_t length, std::uint64_t seed);

double normal_cdf(double z);
double normal_quantile(double p);

}  // namespace specrec
