// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "specrec/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <numeric>

#include "specrec/errors.hpp"
#include "specrec/io.hpp"
#include "specrec/parallel.hpp"

namespace specrec {

namespace {

constexpr char kMagic[8] = {'S', 'P', 'R', 'C', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void write_u64(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t read_u64(std::istream& in, const std::string& origin) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw InputError(origin + ": truncated checkpoint");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

}  // namespace

AdamW::AdamW(Config config, const std::vector<Matrix>& params) : config_(config) {
  if (!(config.lr > 0.0)) throw InputError("optimizer: lr must be positive");
  for (const auto& p : params) {
    m_.emplace_back(p.rows(), p.cols());
    v_.emplace_back(p.rows(), p.cols());
  }
}

void AdamW::step(std::vector<Matrix>& params, const std::vector<Matrix>& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k].data();
    const auto& g = grads[k].data();
    auto& m = m_[k].data();
    auto& v = v_[k].data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p[i] -= config_.lr * (mhat / (std::sqrt(vhat) + config_.eps) + config_.weight_decay * p[i]);
    }
  }
}

TrainPositions parse_train_positions(const std::string& s) {
  if (s == "auto") return TrainPositions::kAuto;
  if (s == "all") return TrainPositions::kAll;
  if (s == "last") return TrainPositions::kLast;
  if (s == "prefixes") return TrainPositions::kPrefixes;
  throw InputError("unknown train positions mode '" + s + "' (auto|all|last|prefixes)");
}

std::string train_positions_name(TrainPositions p) {
  switch (p) {
    case TrainPositions::kAuto: return "auto";
    case TrainPositions::kAll: return "all";
    case TrainPositions::kLast: return "last";
    case TrainPositions::kPrefixes: return "prefixes";
  }
  return "auto";
}

TrainingExample make_example(const SplitDataset& split, std::size_t user, TrainPositions mode, std::size_t negatives,
                             std::mt19937_64& rng, std::size_t cuts) {
  TrainingExample ex;
  auto s = split.train(user);
  if (s.size() > split.max_seq_len() + 1) s = s.subspan(s.size() - split.max_seq_len() - 1);
  if (s.size() < 2) return ex;
  const std::size_t n = s.size();
  switch (mode) {
    case TrainPositions::kAll:
    case TrainPositions::kAuto: {
      ex.inputs.emplace_back(s.begin(), s.end() - 1);
      ex.rows.emplace_back(n - 1);
      std::iota(ex.rows[0].begin(), ex.rows[0].end(), 0);
      ex.targets.emplace_back(s.begin() + 1, s.end());
      break;
    }
    case TrainPositions::kLast: {
      std::vector<std::size_t> ends(n - 1);
      std::iota(ends.begin(), ends.end(), 1);
      const std::size_t k = std::clamp<std::size_t>(cuts, 1, ends.size());
      for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, ends.size() - 1);
        std::swap(ends[i], ends[pick(rng)]);
      }
      ends.resize(k);
      std::sort(ends.begin(), ends.end());
      for (const std::size_t t : ends) {
        ex.inputs.emplace_back(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(t));
        ex.rows.push_back({t - 1});
        ex.targets.push_back({s[t]});
      }
      break;
    }
    case TrainPositions::kPrefixes: {
      for (std::size_t t = 1; t < n; ++t) {
        ex.inputs.emplace_back(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(t));
        ex.rows.push_back({t - 1});
        ex.targets.push_back({s[t]});
      }
      break;
    }
  }
  const auto touched = split.interacted(user);
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < split.n_items(); ++i)
    if (!std::binary_search(touched.begin(), touched.end(), i)) pool.push_back(i);
  const std::size_t k = std::min(negatives, pool.size());
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  ex.negatives.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
  return ex;
}

Var example_loss(Tape& tape, const RecModel& model, const TrainingExample& ex, std::vector<Var>& leaves) {
  // Tokens only for the items this example touches.
  std::vector<std::size_t> items;
  for (const auto& in : ex.inputs) items.insert(items.end(), in.begin(), in.end());
  for (const auto& tg : ex.targets) items.insert(items.end(), tg.begin(), tg.end());
  items.insert(items.end(), ex.negatives.begin(), ex.negatives.end());
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  auto local = [&](std::size_t item) {
    return static_cast<std::size_t>(std::lower_bound(items.begin(), items.end(), item) - items.begin());
  };
  Matrix feats(items.size(), model.features().cols());
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i] >= model.n_items()) throw InputError("training example references unknown item");
    std::copy(model.features().row(items[i]).begin(), model.features().row(items[i]).end(), feats.row(i).begin());
  }
  const Var tokens = model.mlp().apply(tape, tape.constant(std::move(feats)), &leaves);

  std::vector<std::size_t> neg_idx;
  for (std::size_t i : ex.negatives) neg_idx.push_back(local(i));
  const Var neg_t = neg_idx.empty() ? Var{} : transpose(gather_rows(tokens, neg_idx));

  std::vector<Var> losses;
  for (std::size_t f = 0; f < ex.inputs.size(); ++f) {
    std::vector<std::size_t> in_idx, tg_idx;
    for (std::size_t i : ex.inputs[f]) in_idx.push_back(local(i));
    for (std::size_t i : ex.targets[f]) tg_idx.push_back(local(i));
    const Var h = model.backbone().forward(tape, gather_rows(tokens, in_idx));
    const Var rows = gather_rows(h, ex.rows[f]);
    const Var pos = row_sums(hadamard(rows, gather_rows(tokens, tg_idx)));
    Var logits = pos;
    if (!neg_idx.empty()) {
      const Var parts[2] = {pos, matmul(rows, neg_t)};
      logits = concat_cols(parts);
    }
    const std::vector<std::size_t> zeros(ex.targets[f].size(), 0);
    losses.push_back(softmax_cross_entropy(logits, zeros));
  }
  Var total = losses[0];
  for (std::size_t i = 1; i < losses.size(); ++i) total = add(total, losses[i]);
  return losses.size() == 1 ? total : scale(total, 1.0 / static_cast<double>(losses.size()));
}

nlohmann::json EpochLog::to_json() const {
  return {{"epoch", epoch},   {"loss", loss},       {"valid_ndcg@10", valid_ndcg}, {"valid_recall@10", valid_recall},
          {"lr", lr},         {"batches", batches}, {"skipped_batches", skipped_batches}};
}

Scorer model_scorer(const RecModel& model, const SplitDataset& split) {
  auto tokens = std::make_shared<const Matrix>(model.token_table());
  return [model, tokens, &split](std::size_t user, Phase phase, std::span<const std::size_t> candidates) {
    const auto rep = model.forward(*tokens, split.model_input(user, phase)).user_rep;
    std::vector<double> s(candidates.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = dot(rep, tokens->row(candidates[i]));
    return s;
  };
}

namespace {

Checkpoint make_checkpoint(const RecModel& model, const FusionMLP& mlp, const TrainConfig& config,
                           std::size_t epoch) {
  Checkpoint c;
  c.header = config.checkpoint_header;
  c.header["backbone"] = backbone_config_json(model.backbone().config());
  c.header["backbone_hash"] = model.backbone().hash();
  c.header["epoch"] = epoch;
  c.header["train_seed"] = config.seed;
  c.mlp = mlp;
  return c;
}

}  // namespace

TrainResult train(const RecModel& model, const SplitDataset& split, const TrainConfig& config,
                  const std::function<void(const EpochLog&)>& on_epoch) {
  if (config.batch == 0) throw InputError("train: batch size must be positive");
  if (model.n_items() != split.n_items()) throw InputError("train: model and split disagree on the item count");
  TrainResult result;
  result.positions = config.positions;
  if (result.positions == TrainPositions::kAuto) {
    result.positions = model.backbone().config().tfm_enabled ? TrainPositions::kLast : TrainPositions::kAll;
  }
  result.backbone_hash_before = model.backbone().hash();
  result.mlp = model.mlp();
  result.best_ndcg = -1.0;

  FusionMLP current = model.mlp();
  AdamW optim(config.optim, current.params());
  std::size_t since_best = 0;
  std::vector<std::size_t> order(split.n_users());

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 shuffle_rng(mix_seed(config.seed, epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    EpochLog log;
    log.epoch = epoch;
    log.lr = config.optim.lr;
    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch) {
      const std::size_t end = std::min(order.size(), start + config.batch);
      const std::size_t m = end - start;
      const RecModel step_model = model.with_mlp(current);
      std::vector<std::vector<Matrix>> grads(m);
      std::vector<double> losses(m, 0.0);
      std::vector<char> used(m, 0);
      parallel_for(m, config.workers, [&](std::size_t i) {
        const std::size_t user = order[start + i];
        std::mt19937_64 rng(mix_seed(config.seed, epoch * 0x100000000ULL + user));
        const TrainingExample ex = make_example(split, user, result.positions, config.negatives, rng, config.prefix_samples);
        if (ex.inputs.empty()) return;
        Tape tape;
        std::vector<Var> leaves;
        const Var loss = example_loss(tape, step_model, ex, leaves);
        const Gradients g = tape.backward(loss);
        for (const Var& leaf : leaves) grads[i].push_back(g.of(leaf));
        losses[i] = loss.value()(0, 0);
        used[i] = 1;
      });
      const std::size_t n_used = static_cast<std::size_t>(std::count(used.begin(), used.end(), 1));
      if (n_used == 0) {
        ++log.skipped_batches;
        std::clog << "warning: epoch " << epoch << " batch at " << start << " has no trainable sequence, skipped\n";
        continue;
      }
      std::vector<Matrix> total;
      for (const auto& p : current.params()) total.emplace_back(p.rows(), p.cols());
      double batch_loss = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        if (!used[i]) continue;
        batch_loss += losses[i];
        for (std::size_t k = 0; k < total.size(); ++k) total[k] += grads[i][k];
      }
      const double inv = 1.0 / static_cast<double>(n_used);
      for (auto& g : total) g *= inv;
      batch_loss *= inv;
      bool finite = std::isfinite(batch_loss);
      for (const auto& g : total) finite = finite && g.all_finite();
      if (!finite) {
        if (!config.failure_checkpoint.empty()) {
          save_checkpoint(make_checkpoint(model, result.mlp, config, result.best_epoch), config.failure_checkpoint);
        }
        throw TrainingError("non-finite training loss at epoch " + std::to_string(epoch) + ", batch starting at " +
                            std::to_string(start));
      }
      optim.step(current.params(), total);
      loss_sum += batch_loss;
      ++loss_count;
      ++log.batches;
    }
    log.loss = loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;
    const RecModel trained = model.with_mlp(current);
    const MetricsReport valid = evaluate(split, Phase::kValid, model_scorer(trained, split), config.eval, "valid");
    log.valid_ndcg = valid.ndcg;
    log.valid_recall = valid.recall;
    result.log.push_back(log);
    if (on_epoch) on_epoch(log);
    if (log.valid_ndcg > result.best_ndcg) {
      result.best_ndcg = log.valid_ndcg;
      result.best_epoch = epoch;
      result.mlp = current;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  if (result.best_ndcg < 0.0) result.best_ndcg = 0.0;
  result.backbone_hash_after = model.backbone().hash();
  return result;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  nlohmann::json header = ckpt.header;
  header["activation"] = ckpt.mlp.activation() == Activation::kGelu ? "gelu" : "identity";
  nlohmann::json shapes = nlohmann::json::array();
  for (std::size_t k = 0; k < 4; ++k) {
    shapes.push_back({{"name", FusionMLP::kParamNames[k]},
                      {"rows", ckpt.mlp.params()[k].rows()},
                      {"cols", ckpt.mlp.params()[k].cols()}});
  }
  header["params"] = shapes;
  header["mlp_hash"] = ckpt.mlp.hash();
  const std::string text = header.dump();
  AtomicFile f(path, true);
  auto& out = f.stream();
  out.write(kMagic, sizeof kMagic);
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((kVersion >> (8 * i)) & 0xff));
  write_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& p : ckpt.mlp.params()) write_f64_le(out, p.data());
  f.commit();
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint " + path.string());
  const std::string origin = path.string();
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw InputError(origin + ": not a checkpoint");
  unsigned char vb[4];
  if (!in.read(reinterpret_cast<char*>(vb), 4)) throw InputError(origin + ": truncated checkpoint");
  const std::uint32_t version = vb[0] | (vb[1] << 8) | (vb[2] << 16) | (static_cast<std::uint32_t>(vb[3]) << 24);
  if (version != kVersion) throw InputError(origin + ": unsupported checkpoint version " + std::to_string(version));
  const std::uint64_t len = read_u64(in, origin);
  if (len > (1u << 26)) throw InputError(origin + ": implausible header length");
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) throw InputError(origin + ": truncated header");
  Checkpoint c;
  try {
    c.header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(origin + ": bad checkpoint header: " + e.what());
  }
  std::vector<Matrix> params;
  for (const auto& s : c.header.at("params")) {
    Matrix m(s.at("rows").get<std::size_t>(), s.at("cols").get<std::size_t>());
    read_f64_le(in, m.data(), origin);
    if (!m.all_finite()) throw InputError(origin + ": checkpoint holds non-finite weights");
    params.push_back(std::move(m));
  }
  const Activation act = c.header.value("activation", "gelu") == "gelu" ? Activation::kGelu : Activation::kIdentity;
  c.mlp = FusionMLP(std::move(params), act);
  if (c.header.contains("mlp_hash") && c.header["mlp_hash"].get<std::string>() != c.mlp.hash()) {
    throw InputError(origin + ": checkpoint weight hash mismatch");
  }
  return c;
}

}  // namespace specrec
