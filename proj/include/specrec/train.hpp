// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "specrec/dataset.hpp"
#include "specrec/evaluate.hpp"
#include "specrec/model.hpp"

namespace specrec {

/// Decoupled weight decay Adam.
class AdamW {
 public:
  struct Config {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
  };

  AdamW(Config config, const std::vector<Matrix>& params);
  void step(std::vector<Matrix>& params, const std::vector<Matrix>& grads);
  std::size_t steps() const noexcept { return t_; }

 private:
  Config config_;
  std::vector<Matrix> m_, v_;
  std::size_t t_ = 0;
};

/// Which hidden rows carry a next-item loss.
///  all:      every row of one forward over the history (leaks future items
///            through TFM, exact when TFM is off)
///  last:     one random prefix per sequence, its final row only
///  prefixes: every prefix through its own forward (causal-safe, slow)
enum class TrainPositions { kAuto, kAll, kLast, kPrefixes };
TrainPositions parse_train_positions(const std::string& s);
std::string train_positions_name(TrainPositions p);

/// One sequence's contribution: forward over `inputs` (one per forward),
/// row `rows[f]` of forward f predicts `targets[f]`, scored against the truth
/// and the shared negatives.
struct TrainingExample {
  std::vector<std::vector<std::size_t>> inputs;
  std::vector<std::vector<std::size_t>> rows;
  std::vector<std::vector<std::size_t>> targets;
  std::vector<std::size_t> negatives;
};

/// Builds a user's example from the training history; nullopt-like empty
/// example when the history is too short.
/// `cuts` is the number of distinct random prefixes drawn in kLast mode.
TrainingExample make_example(const SplitDataset& split, std::size_t user, TrainPositions mode, std::size_t negatives,
                             std::mt19937_64& rng, std::size_t cuts = 1);

/// Mean sampled-softmax loss of an example. MLP weights are registered as
/// parameters (leaves receives them); the backbone stays constant.
Var example_loss(Tape& tape, const RecModel& model, const TrainingExample& ex, std::vector<Var>& leaves);

struct TrainConfig {
  AdamW::Config optim;
  std::size_t batch = 32;
  std::size_t epochs = 20;
  std::size_t patience = 3;
  std::size_t negatives = 100;
  std::uint64_t seed = 1;
  TrainPositions positions = TrainPositions::kAuto;
  std::size_t prefix_samples = 1;  // prefixes per sequence in last-position mode
  std::size_t workers = 1;
  EvalConfig eval;
  /// Written with the last good weights if the loss turns non-finite.
  std::filesystem::path failure_checkpoint;
  nlohmann::json checkpoint_header = nlohmann::json::object();
};

struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;
  double valid_ndcg = 0.0;
  double valid_recall = 0.0;
  double lr = 0.0;
  std::size_t batches = 0;
  std::size_t skipped_batches = 0;

  nlohmann::json to_json() const;
};

struct TrainResult {
  FusionMLP mlp;  // best validation weights
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;  // 0 = initial weights
  double best_ndcg = 0.0;
  std::string backbone_hash_before;
  std::string backbone_hash_after;
  TrainPositions positions = TrainPositions::kAll;
};

Scorer model_scorer(const RecModel& model, const SplitDataset& split);

TrainResult train(const RecModel& model, const SplitDataset& split, const TrainConfig& config,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

/// Binary checkpoint: magic, version, JSON header, little-endian f64 blocks.
struct Checkpoint {
  nlohmann::json header = nlohmann::json::object();
  FusionMLP mlp;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace specrec
