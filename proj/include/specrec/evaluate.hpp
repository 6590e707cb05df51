// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "specrec/dataset.hpp"
#include "specrec/errors.hpp"

namespace specrec {

/// Ground truth plus sampled negatives, in a seeded shuffled order so that
/// score ties do not systematically favor the truth.
struct CandidateSet {
  std::size_t user = 0;
  std::size_t truth = 0;
  std::vector<std::size_t> negatives;  // sampling order
  std::vector<std::size_t> items;      // scoring order, truth included once
  std::size_t truth_index = 0;         // position of truth in items
  std::uint64_t seed = 0;
};

class InsufficientCandidates : public EvaluationError {
 public:
  using EvaluationError::EvaluationError;
};

/// Per-user seed: global seed XOR user index.
std::uint64_t candidate_seed(std::uint64_t seed, std::size_t user);

/// Samples n negatives without replacement from items the user never touched
/// (train, valid and test all excluded).
CandidateSet sample_candidates(const SplitDataset& split, std::size_t user, Phase phase, std::size_t n,
                               std::uint64_t seed);

struct RankResult {
  std::size_t rank = 0;  // 1-based
  double ndcg = 0.0;
  double recall = 0.0;
};

/// Rank of the truth after a stable descending sort; equal scores keep
/// candidate order. NDCG@k = 1 / log2(rank + 1) and Recall@k = 1 inside the top k.
RankResult rank_metrics(std::span<const double> scores, std::size_t truth_index, std::size_t k = 10);

/// Scores for `candidates`, in order, for one user at one phase.
using Scorer = std::function<std::vector<double>(std::size_t user, Phase phase, std::span<const std::size_t> candidates)>;

struct EvalConfig {
  std::size_t k = 10;
  std::size_t n_candidates = 100;
  std::uint64_t seed = 2024;
  std::size_t workers = 1;
  std::size_t max_users = 0;  // 0 = all
};

struct UserMetrics {
  std::size_t user = 0;
  std::size_t rank = 0;
  double ndcg = 0.0;
  double recall = 0.0;
};

struct MetricsReport {
  std::string label;
  std::string phase;
  std::size_t k = 10;
  double ndcg = 0.0;
  double recall = 0.0;
  std::size_t users = 0;
  std::size_t excluded = 0;
  std::vector<UserMetrics> per_user;
  std::string fingerprint;

  nlohmann::json to_json() const;
  std::string per_user_csv() const;
};

MetricsReport evaluate(const SplitDataset& split, Phase phase, const Scorer& scorer, const EvalConfig& config,
                       const std::string& label = "model");

/// Uniform scores drawn from a generator seeded per user.
Scorer random_scorer(std::uint64_t seed);
/// Training-set frequency of each candidate.
Scorer popularity_scorer(const SplitDataset& split);

std::string phase_name(Phase phase);

}  // namespace specrec
