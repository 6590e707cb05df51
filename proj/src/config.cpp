// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "specrec/config.hpp"

#include "specrec/errors.hpp"
#include "specrec/io.hpp"
#include "specrec/parallel.hpp"

namespace specrec {

namespace {

bool same_kind(const nlohmann::json& a, const nlohmann::json& b) {
  if (a.is_number() && b.is_number()) return !(a.is_number_integer() || a.is_number_unsigned()) || b.is_number_integer() || b.is_number_unsigned();
  return a.type() == b.type();
}

void overlay(nlohmann::json& base, const nlohmann::json& patch, const std::string& prefix) {
  if (!patch.is_object()) throw InputError("config: '" + prefix + "' must be an object");
  for (const auto& [key, value] : patch.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!base.contains(key)) throw InputError("config: unknown key '" + path + "'");
    auto& slot = base[key];
    if (slot.is_object()) {
      overlay(slot, value, path);
    } else {
      if (!same_kind(slot, value)) throw InputError("config: '" + path + "' has the wrong type");
      slot = slot.is_number_float() ? nlohmann::json(value.get<double>()) : value;
    }
  }
}

template <typename T>
T get(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

nlohmann::json RunConfig::defaults() {
  return {
      {"data", {{"format", "tsv"}, {"min_interactions", 5}, {"max_seq_len", 50}}},
      {"graph", {{"binarize", true}}},
      {"embeddings",
       {{"d_id", 50},
        {"d_text", 50},
        {"window", 5},
        {"negatives", 5},
        {"epochs", 5},
        {"lr", 0.025},
        {"seed", 1},
        {"text_seed", 3},
        {"text_buckets", 4096}}},
      {"model", {{"d_model", 64}, {"mlp_hidden", 0}, {"mlp_seed", 11}, {"activation", "gelu"}}},
      {"backbone", {{"layers", 4}, {"heads", 2}, {"ffn_mult", 4}, {"seed", 7}}},
      {"glpf", {{"enabled", true}, {"alpha", 0.3}, {"theta", nlohmann::json::array()}, {"fused_tokens", false}}},
      {"tfm", {{"enabled", true}, {"cutoff", 0.3}, {"order", 2}, {"residual", false}}},
      {"train",
       {{"lr", 1e-4},
        {"weight_decay", 0.01},
        {"batch", 32},
        {"epochs", 20},
        {"patience", 3},
        {"negatives", 100},
        {"seed", 1},
        {"positions", "auto"},
        {"prefix_samples", 1}}},
      {"eval", {{"k", 10}, {"n_candidates", 100}, {"seed", 2024}}},
      {"analysis", {{"bands", 4}, {"max_users", 0}, {"sample_seed", 1}}},
      {"synth", {{"users", 200}, {"items", 100}, {"mean_length", 20.0}, {"rho", 0.5}, {"seed", 1}, {"text", true}}},
      {"probe",
       {{"family", "locality"},
        {"rho", 0.5},
        {"t_min", 8},
        {"t_max", 64},
        {"dim", 4},
        {"trials", 1000},
        {"seed", 1},
        {"laplacian", "combinatorial"}}},
      {"workers", 0},
  };
}

RunConfig::RunConfig() : doc_(defaults()) {}

RunConfig RunConfig::from_json(const nlohmann::json& overrides) {
  RunConfig c;
  overlay(c.doc_, overrides, "");
  c.validate();
  return c;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

void RunConfig::set(const std::string& dotted, const nlohmann::json& value) {
  nlohmann::json patch = value;
  std::string rest = dotted;
  std::vector<std::string> parts;
  for (std::size_t pos; (pos = rest.find('.')) != std::string::npos; rest = rest.substr(pos + 1)) {
    parts.push_back(rest.substr(0, pos));
  }
  parts.push_back(rest);
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = nlohmann::json{{*it, patch}};
  overlay(doc_, patch, "");
  validate();
}

const nlohmann::json& RunConfig::at(const std::string& dotted) const {
  const nlohmann::json* node = &doc_;
  std::string rest = dotted;
  while (true) {
    const auto pos = rest.find('.');
    const std::string key = rest.substr(0, pos);
    if (!node->contains(key)) throw InputError("config: unknown key '" + dotted + "'");
    node = &(*node)[key];
    if (pos == std::string::npos) return *node;
    rest = rest.substr(pos + 1);
  }
}

std::string RunConfig::hash() const { return hex64(fnv1a64(doc_.dump())); }

std::size_t RunConfig::workers() const { return resolve_workers(get<std::size_t>(doc_, "workers")); }

SynthConfig RunConfig::synth() const {
  const auto& j = doc_["synth"];
  SynthConfig c;
  c.users = get<std::size_t>(j, "users");
  c.items = get<std::size_t>(j, "items");
  c.mean_length = get<double>(j, "mean_length");
  c.rho = get<double>(j, "rho");
  c.seed = get<std::uint64_t>(j, "seed");
  c.with_text = get<bool>(j, "text");
  return c;
}

PretrainConfig RunConfig::pretrain() const {
  const auto& j = doc_["embeddings"];
  PretrainConfig c;
  c.dim = get<std::size_t>(j, "d_id");
  c.window = get<std::size_t>(j, "window");
  c.negatives = get<std::size_t>(j, "negatives");
  c.epochs = get<std::size_t>(j, "epochs");
  c.lr = get<double>(j, "lr");
  c.seed = get<std::uint64_t>(j, "seed");
  return c;
}

MlpConfig RunConfig::mlp() const {
  const auto& j = doc_["model"];
  MlpConfig c;
  c.hidden = get<std::size_t>(j, "mlp_hidden");
  c.seed = get<std::uint64_t>(j, "mlp_seed");
  c.activation = get<std::string>(j, "activation") == "identity" ? Activation::kIdentity : Activation::kGelu;
  return c;
}

BackboneConfig RunConfig::backbone() const {
  const auto& b = doc_["backbone"];
  const auto& t = doc_["tfm"];
  BackboneConfig c;
  c.layers = get<std::size_t>(b, "layers");
  c.heads = get<std::size_t>(b, "heads");
  c.ffn_mult = get<std::size_t>(b, "ffn_mult");
  c.seed = get<std::uint64_t>(b, "seed");
  c.d_model = get<std::size_t>(doc_["model"], "d_model");
  c.tfm_enabled = get<bool>(t, "enabled");
  c.tfm.cutoff = get<double>(t, "cutoff");
  c.tfm.order = get<int>(t, "order");
  c.tfm_residual = get<bool>(t, "residual");
  return c;
}

bool RunConfig::glpf_enabled() const { return get<bool>(doc_["glpf"], "enabled"); }

PolyFilterSpec RunConfig::glpf_spec() const {
  const auto& j = doc_["glpf"];
  const auto theta = get<std::vector<double>>(j, "theta");
  if (!theta.empty()) return {theta};
  return PolyFilterSpec::first_order(get<double>(j, "alpha"));
}

TrainConfig RunConfig::train() const {
  const auto& j = doc_["train"];
  TrainConfig c;
  c.optim.lr = get<double>(j, "lr");
  c.optim.weight_decay = get<double>(j, "weight_decay");
  c.batch = get<std::size_t>(j, "batch");
  c.epochs = get<std::size_t>(j, "epochs");
  c.patience = get<std::size_t>(j, "patience");
  c.negatives = get<std::size_t>(j, "negatives");
  c.seed = get<std::uint64_t>(j, "seed");
  c.positions = parse_train_positions(get<std::string>(j, "positions"));
  c.prefix_samples = get<std::size_t>(j, "prefix_samples");
  c.workers = workers();
  c.eval = eval();
  return c;
}

EvalConfig RunConfig::eval() const {
  const auto& j = doc_["eval"];
  EvalConfig c;
  c.k = get<std::size_t>(j, "k");
  c.n_candidates = get<std::size_t>(j, "n_candidates");
  c.seed = get<std::uint64_t>(j, "seed");
  c.workers = workers();
  return c;
}

AnalysisConfig RunConfig::analysis() const {
  const auto& j = doc_["analysis"];
  AnalysisConfig c;
  c.bands = get<std::size_t>(j, "bands");
  c.max_users = get<std::size_t>(j, "max_users");
  c.sample_seed = get<std::uint64_t>(j, "sample_seed");
  c.workers = workers();
  return c;
}

ProbeConfig RunConfig::probe() const {
  const auto& j = doc_["probe"];
  ProbeConfig c;
  c.family = parse_graph_family(get<std::string>(j, "family"));
  c.rho = get<double>(j, "rho");
  c.t_min = get<std::size_t>(j, "t_min");
  c.t_max = get<std::size_t>(j, "t_max");
  c.dim = get<std::size_t>(j, "dim");
  c.trials = get<std::size_t>(j, "trials");
  c.seed = get<std::uint64_t>(j, "seed");
  c.laplacian = parse_laplacian_kind(get<std::string>(j, "laplacian"));
  const auto b = backbone();
  c.filter = b.tfm;
  return c;
}

void RunConfig::validate() const {
  const std::string act = get<std::string>(doc_["model"], "activation");
  if (act != "gelu" && act != "identity") throw InputError("config: model.activation must be gelu or identity");
  parse_log_format(get<std::string>(doc_["data"], "format"));
  if (get<std::size_t>(doc_["data"], "min_interactions") < 3) throw InputError("config: data.min_interactions must be >= 3");
  if (get<std::size_t>(doc_["data"], "max_seq_len") < 1) throw InputError("config: data.max_seq_len must be >= 1");
  parse_train_positions(get<std::string>(doc_["train"], "positions"));
  parse_graph_family(get<std::string>(doc_["probe"], "family"));
  parse_laplacian_kind(get<std::string>(doc_["probe"], "laplacian"));
  if (get<double>(doc_["train"], "lr") <= 0.0) throw InputError("config: train.lr must be positive");
  if (get<std::size_t>(doc_["train"], "batch") == 0) throw InputError("config: train.batch must be positive");
  if (get<std::size_t>(doc_["analysis"], "bands") == 0) throw InputError("config: analysis.bands must be positive");
  if (get<bool>(doc_["glpf"], "fused_tokens")) {
    throw CapabilityError("config: glpf.fused_tokens is reserved; G-LPF filters the ID table only");
  }
  const auto theta = get<std::vector<double>>(doc_["glpf"], "theta");
  if (theta.empty()) PolyFilterSpec::first_order(get<double>(doc_["glpf"], "alpha"));
  if (get<bool>(doc_["tfm"], "enabled")) backbone().tfm.validate();
}

}  // namespace specrec
