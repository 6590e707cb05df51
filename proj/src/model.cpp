// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "specrec/model.hpp"

#include <cmath>
#include <random>

#include "specrec/errors.hpp"
#include "specrec/io.hpp"

namespace specrec {

namespace {

Matrix gaussian(std::size_t rows, std::size_t cols, double sd, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, sd);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = dist(rng);
  return m;
}

}  // namespace

FusionMLP::FusionMLP(std::size_t d_in, std::size_t d_model, const MlpConfig& config)
    : activation_(config.activation) {
  if (d_in == 0 || d_model == 0) throw InputError("fusion MLP dimensions must be positive");
  const std::size_t hidden = config.hidden == 0 ? 2 * d_model : config.hidden;
  std::mt19937_64 rng(config.seed);
  auto xavier = [&](std::size_t r, std::size_t c) {
    const double a = std::sqrt(6.0 / static_cast<double>(r + c));
    std::uniform_real_distribution<double> dist(-a, a);
    Matrix m(r, c);
    for (double& v : m.data()) v = dist(rng);
    return m;
  };
  params_.push_back(xavier(d_in, hidden));
  params_.emplace_back(1, hidden);
  params_.push_back(xavier(hidden, d_model));
  params_.emplace_back(1, d_model);
}

FusionMLP::FusionMLP(std::vector<Matrix> params, Activation activation)
    : params_(std::move(params)), activation_(activation) {
  if (params_.size() != 4 || params_[1].rows() != 1 || params_[3].rows() != 1 ||
      params_[0].cols() != params_[1].cols() || params_[0].cols() != params_[2].rows() ||
      params_[2].cols() != params_[3].cols()) {
    throw InputError("fusion MLP parameter shapes are inconsistent");
  }
}

Var FusionMLP::apply(Tape& tape, Var input, std::vector<Var>* leaves) const {
  if (input.cols() != d_in()) {
    throw InputError("fusion MLP expects " + std::to_string(d_in()) + " input columns, got " +
                     std::to_string(input.cols()));
  }
  Var p[4];
  for (std::size_t i = 0; i < 4; ++i) {
    p[i] = leaves ? tape.parameter(params_[i], kParamNames[i]) : tape.constant(params_[i]);
    if (leaves) leaves->push_back(p[i]);
  }
  const Var h = specrec::activation(add_row_bias(matmul(input, p[0]), p[1]), activation_);
  return add_row_bias(matmul(h, p[2]), p[3]);
}

Matrix FusionMLP::apply(const Matrix& input) const {
  Tape tape;
  return apply(tape, tape.constant(input)).value();
}

std::string FusionMLP::hash() const {
  std::uint64_t h = fnv1a64(activation_ == Activation::kGelu ? "gelu" : "identity");
  for (const auto& p : params_) h = fnv1a64(p.data(), h);
  return hex64(h);
}

Backbone::Backbone(const BackboneConfig& config) : config_(config) {
  const std::size_t d = config.d_model;
  if (config.layers == 0 || d == 0 || config.heads == 0 || d % config.heads != 0) {
    throw InputError("backbone: need layers >= 1 and d_model divisible by heads");
  }
  if (config.tfm_enabled) config.tfm.validate();
  const std::size_t f = config.ffn_mult * d;
  std::mt19937_64 rng(config.seed);
  const double sd_d = 1.0 / std::sqrt(static_cast<double>(d));
  const double sd_f = 1.0 / std::sqrt(static_cast<double>(f));
  for (std::size_t l = 0; l < config.layers; ++l) {
    Layer layer;
    layer.ln1_gamma = Matrix(1, d, 1.0);
    layer.ln1_beta = Matrix(1, d);
    layer.wq = gaussian(d, d, sd_d, rng);
    layer.wk = gaussian(d, d, sd_d, rng);
    layer.wv = gaussian(d, d, sd_d, rng);
    layer.wo = gaussian(d, d, sd_d, rng);
    layer.ln2_gamma = Matrix(1, d, 1.0);
    layer.ln2_beta = Matrix(1, d);
    layer.w1 = gaussian(d, f, sd_d, rng);
    layer.b1 = Matrix(1, f);
    layer.w2 = gaussian(f, d, sd_f, rng);
    layer.b2 = Matrix(1, d);
    layers_.push_back(std::move(layer));
  }
}

std::string Backbone::hash() const {
  std::uint64_t h = fnv1a64("backbone");
  for (const auto& l : layers_) {
    for (const Matrix* m : {&l.ln1_gamma, &l.ln1_beta, &l.wq, &l.wk, &l.wv, &l.wo, &l.ln2_gamma, &l.ln2_beta, &l.w1,
                            &l.b1, &l.w2, &l.b2}) {
      h = fnv1a64(m->data(), h);
    }
  }
  return hex64(h);
}

Var Backbone::forward(Tape& tape, Var tokens, std::vector<Matrix>* capture) const {
  const std::size_t d = config_.d_model;
  if (tokens.cols() != d) throw InputError("backbone: token width does not match d_model");
  if (tokens.rows() == 0) throw InputError("backbone: empty sequence");
  const std::size_t t = tokens.rows();
  const std::size_t dh = d / config_.heads;
  const double att_scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const std::vector<double> gains =
      config_.tfm_enabled ? butterworth_gains(config_.tfm, t) : std::vector<double>();
  if (capture) {
    capture->clear();
    capture->push_back(tokens.value());
  }
  Var x = tokens;
  for (const Layer& l : layers_) {
    const Var a = layer_norm_rows(x, tape.constant(l.ln1_gamma), tape.constant(l.ln1_beta));
    const Var q = matmul(a, tape.constant(l.wq));
    const Var k = matmul(a, tape.constant(l.wk));
    const Var v = matmul(a, tape.constant(l.wv));
    std::vector<Var> heads;
    for (std::size_t h = 0; h < config_.heads; ++h) {
      const Var qh = slice_cols(q, h * dh, dh);
      const Var kh = slice_cols(k, h * dh, dh);
      const Var vh = slice_cols(v, h * dh, dh);
      const Var att = softmax_rows(scale(matmul(qh, transpose(kh)), att_scale), true);
      heads.push_back(matmul(att, vh));
    }
    const Var o = heads.size() == 1 ? heads[0] : concat_cols(heads);
    x = add(x, matmul(o, tape.constant(l.wo)));
    const Var b = layer_norm_rows(x, tape.constant(l.ln2_gamma), tape.constant(l.ln2_beta));
    const Var ff = activation(add_row_bias(matmul(b, tape.constant(l.w1)), tape.constant(l.b1)), Activation::kGelu);
    x = add(x, add_row_bias(matmul(ff, tape.constant(l.w2)), tape.constant(l.b2)));
    if (config_.tfm_enabled && t > 1) {
      const Var filtered = spectral_filter(x, gains);
      x = config_.tfm_residual ? add(x, filtered) : filtered;
    }
    if (capture) capture->push_back(x.value());
  }
  return x;
}

Matrix fusion_input(const EmbeddingTable& id, const EmbeddingTable& text) {
  if (id.n_items() != text.n_items()) {
    throw InputError("fusion: id table has " + std::to_string(id.n_items()) + " items, text table has " +
                     std::to_string(text.n_items()));
  }
  Matrix x(id.n_items(), id.dim() + text.dim());
  for (std::size_t i = 0; i < id.n_items(); ++i) {
    auto row = x.row(i);
    std::copy(id.rows.row(i).begin(), id.rows.row(i).end(), row.begin());
    std::copy(text.rows.row(i).begin(), text.rows.row(i).end(), row.begin() + static_cast<std::ptrdiff_t>(id.dim()));
  }
  return x;
}

Matrix fuse(const EmbeddingTable& id, const EmbeddingTable& text, const FusionMLP& mlp) {
  return mlp.apply(fusion_input(id, text));
}

std::vector<double> score(std::span<const double> user_rep, const Matrix& candidate_tokens) {
  if (candidate_tokens.cols() != user_rep.size()) throw InputError("score: dimension mismatch");
  std::vector<double> s(candidate_tokens.rows());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = dot(user_rep, candidate_tokens.row(i));
  return s;
}

RecModel::RecModel(Matrix features, FusionMLP mlp, BackboneConfig backbone)
    : features_(std::make_shared<const Matrix>(std::move(features))),
      mlp_(std::move(mlp)),
      backbone_(std::make_shared<const Backbone>(backbone)) {
  if (mlp_.d_in() != features_->cols()) throw InputError("fusion MLP input width does not match the item features");
  if (mlp_.d_model() != backbone.d_model) throw InputError("fusion MLP output width does not match d_model");
  if (!features_->all_finite()) throw InputError("item features contain non-finite values");
}

RecModel::RecModel(const EmbeddingTable& id, const EmbeddingTable& text, FusionMLP mlp, BackboneConfig backbone)
    : RecModel(fusion_input(id, text), std::move(mlp), backbone) {}

RecModel RecModel::with_mlp(FusionMLP mlp) const {
  RecModel copy = *this;
  if (mlp.d_in() != mlp_.d_in() || mlp.d_model() != mlp_.d_model()) throw InputError("fusion MLP shape changed");
  copy.mlp_ = std::move(mlp);
  return copy;
}

Matrix RecModel::token_table() const { return mlp_.apply(*features_); }

ForwardResult RecModel::forward(const Matrix& tokens, std::span<const std::size_t> sequence, bool capture) const {
  if (sequence.empty()) throw InputError("forward: empty sequence");
  Matrix x(sequence.size(), tokens.cols());
  for (std::size_t t = 0; t < sequence.size(); ++t) {
    if (sequence[t] >= tokens.rows()) throw InputError("forward: unknown item index " + std::to_string(sequence[t]));
    std::copy(tokens.row(sequence[t]).begin(), tokens.row(sequence[t]).end(), x.row(t).begin());
  }
  Tape tape;
  ForwardResult r;
  const Var h = backbone_->forward(tape, tape.constant(std::move(x)), capture ? &r.trace.hidden : nullptr);
  const auto last = h.value().row(h.rows() - 1);
  r.user_rep.assign(last.begin(), last.end());
  return r;
}

ForwardResult RecModel::forward(std::span<const std::size_t> sequence, bool capture) const {
  for (std::size_t i : sequence) {
    if (i >= n_items()) throw InputError("forward: unknown item index " + std::to_string(i));
  }
  Matrix feats(sequence.size(), features_->cols());
  for (std::size_t t = 0; t < sequence.size(); ++t)
    std::copy(features_->row(sequence[t]).begin(), features_->row(sequence[t]).end(), feats.row(t).begin());
  const Matrix tokens = mlp_.apply(feats);
  std::vector<std::size_t> local(sequence.size());
  for (std::size_t t = 0; t < local.size(); ++t) local[t] = t;
  return forward(tokens, local, capture);
}

nlohmann::json backbone_config_json(const BackboneConfig& c) {
  return {{"layers", c.layers},
          {"d_model", c.d_model},
          {"heads", c.heads},
          {"ffn_mult", c.ffn_mult},
          {"seed", c.seed},
          {"tfm", {{"enabled", c.tfm_enabled}, {"cutoff", c.tfm.cutoff}, {"order", c.tfm.order}, {"residual", c.tfm_residual}}}};
}

BackboneConfig backbone_config_from_json(const nlohmann::json& j) {
  BackboneConfig c;
  c.layers = j.at("layers").get<std::size_t>();
  c.d_model = j.at("d_model").get<std::size_t>();
  c.heads = j.at("heads").get<std::size_t>();
  c.ffn_mult = j.at("ffn_mult").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  const auto& t = j.at("tfm");
  c.tfm_enabled = t.at("enabled").get<bool>();
  c.tfm.cutoff = t.at("cutoff").get<double>();
  c.tfm.order = t.at("order").get<int>();
  c.tfm_residual = t.at("residual").get<bool>();
  return c;
}

}  // namespace specrec
