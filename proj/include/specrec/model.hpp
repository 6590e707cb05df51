// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "specrec/embedding.hpp"
#include "specrec/matrix.hpp"
#include "specrec/tape.hpp"
#include "specrec/tfm.hpp"

namespace specrec {

struct MlpConfig {
  std::size_t hidden = 0;  // 0 means 2 * d_model
  Activation activation = Activation::kGelu;
  std::uint64_t seed = 11;
};

/// x = W2 act(W1 [e_id ; e_text] + b1) + b2, the only trainable block.
class FusionMLP {
 public:
  static constexpr const char* kParamNames[4] = {"w1", "b1", "w2", "b2"};

  FusionMLP() = default;
  /// Xavier-uniform weights, zero biases.
  FusionMLP(std::size_t d_in, std::size_t d_model, const MlpConfig& config);
  FusionMLP(std::vector<Matrix> params, Activation activation);

  std::size_t d_in() const { return params_[0].rows(); }
  std::size_t hidden() const { return params_[0].cols(); }
  std::size_t d_model() const { return params_[2].cols(); }
  Activation activation() const noexcept { return activation_; }

  std::vector<Matrix>& params() noexcept { return params_; }
  const std::vector<Matrix>& params() const noexcept { return params_; }

  /// When `leaves` is given the weights enter the tape as trainable
  /// parameters (appended in kParamNames order); otherwise as constants.
  Var apply(Tape& tape, Var input, std::vector<Var>* leaves = nullptr) const;
  Matrix apply(const Matrix& input) const;

  std::string hash() const;

 private:
  std::vector<Matrix> params_;
  Activation activation_ = Activation::kGelu;
};

struct BackboneConfig {
  std::size_t layers = 4;
  std::size_t d_model = 64;
  std::size_t heads = 2;
  std::size_t ffn_mult = 4;
  std::uint64_t seed = 7;
  bool tfm_enabled = false;
  ButterworthSpec tfm;
  bool tfm_residual = false;  // H + tfm(H) instead of tfm(H)
};

/// Frozen stack of pre-norm causal Transformer layers with seeded random
/// weights drawn from N(0, 1 / fan_in). No positional encoding.
class Backbone {
 public:
  explicit Backbone(const BackboneConfig& config);

  const BackboneConfig& config() const noexcept { return config_; }
  /// Hash of every weight; independent of the TFM settings.
  std::string hash() const;

  /// tokens: T x d_model. Returns the last layer's T x d_model states. When
  /// capture is given it receives layers + 1 matrices, entry 0 being the
  /// input tokens and entry l the output of layer l (after TFM).
  Var forward(Tape& tape, Var tokens, std::vector<Matrix>* capture = nullptr) const;

 private:
  struct Layer {
    Matrix ln1_gamma, ln1_beta, wq, wk, wv, wo, ln2_gamma, ln2_beta, w1, b1, w2, b2;
  };
  BackboneConfig config_;
  std::vector<Layer> layers_;
};

struct LayerTrace {
  std::vector<Matrix> hidden;  // layers + 1 entries, each T x d_model
};

struct ForwardResult {
  std::vector<double> user_rep;
  LayerTrace trace;  // empty unless captured
};

/// Concatenates (id, text) per item; tables must cover the same items.
Matrix fusion_input(const EmbeddingTable& id, const EmbeddingTable& text);
Matrix fuse(const EmbeddingTable& id, const EmbeddingTable& text, const FusionMLP& mlp);

/// h_u^T x_j for each candidate row.
std::vector<double> score(std::span<const double> user_rep, const Matrix& candidate_tokens);

/// Fused-token recommender over a frozen backbone. Copies share the fusion
/// inputs and backbone.
class RecModel {
 public:
  RecModel(Matrix features, FusionMLP mlp, BackboneConfig backbone);
  RecModel(const EmbeddingTable& id, const EmbeddingTable& text, FusionMLP mlp, BackboneConfig backbone);

  std::size_t n_items() const { return features_->rows(); }
  const Matrix& features() const { return *features_; }
  const FusionMLP& mlp() const noexcept { return mlp_; }
  const Backbone& backbone() const noexcept { return *backbone_; }

  RecModel with_mlp(FusionMLP mlp) const;

  /// All item tokens, n_items x d_model.
  Matrix token_table() const;
  /// Forward over precomputed tokens (see token_table).
  ForwardResult forward(const Matrix& tokens, std::span<const std::size_t> sequence, bool capture = false) const;
  ForwardResult forward(std::span<const std::size_t> sequence, bool capture = false) const;

 private:
  std::shared_ptr<const Matrix> features_;
  FusionMLP mlp_;
  std::shared_ptr<const Backbone> backbone_;
};

nlohmann::json backbone_config_json(const BackboneConfig& c);
BackboneConfig backbone_config_from_json(const nlohmann::json& j);

}  // namespace specrec
