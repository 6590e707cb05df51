// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "specrec/analysis.hpp"
#include "specrec/config.hpp"
#include "specrec/dataset.hpp"
#include "specrec/embedding.hpp"
#include "specrec/errors.hpp"
#include "specrec/evaluate.hpp"
#include "specrec/glpf.hpp"
#include "specrec/graph.hpp"
#include "specrec/io.hpp"
#include "specrec/model.hpp"
#include "specrec/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace specrec {
namespace {

/// Outputs are staged next to their final names and renamed together.
class OutputSet {
 public:
  OutputSet(std::vector<fs::path> inputs) {
    for (const auto& p : inputs) {
      if (!p.empty() && fs::exists(p)) inputs_.push_back(fs::weakly_canonical(p));
    }
  }
  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& [staged, final_path] : staged_) fs::remove(staged, ec);
  }
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;

  fs::path stage(const fs::path& final_path) {
    if (final_path.empty()) throw InputError("output path is empty");
    const auto canon = fs::weakly_canonical(final_path);
    for (const auto& in : inputs_) {
      if (in == canon) throw InputError("refusing to overwrite input " + final_path.string());
    }
    if (final_path.has_parent_path()) fs::create_directories(final_path.parent_path());
    fs::path staged = final_path;
    staged += ".staged";
    staged_.emplace_back(staged, final_path);
    return staged;
  }

  void commit() {
    for (const auto& [staged, final_path] : staged_) fs::rename(staged, final_path);
    committed_ = true;
  }

  std::vector<fs::path> finals() const {
    std::vector<fs::path> out;
    for (const auto& [staged, final_path] : staged_) out.push_back(final_path);
    return out;
  }

 private:
  std::vector<fs::path> inputs_;
  std::vector<std::pair<fs::path, fs::path>> staged_;
  bool committed_ = false;
};

json sidecar(const RunConfig& config, const std::string& command, const std::string& kind) {
  return {{"config_hash", config.hash()}, {"command", command}, {"kind", kind}};
}

void write_with_sidecar(OutputSet& outs, const fs::path& path, const std::string& text, json meta) {
  write_text_file(outs.stage(path), text);
  fs::path side = path;
  side += ".meta.json";
  write_text_file(outs.stage(side), meta.dump(2) + "\n");
}

void write_json(OutputSet& outs, const fs::path& path, const json& j) {
  write_text_file(outs.stage(path), j.dump(2) + "\n");
}

json parse_flag_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    return text;
  }
}

struct Options {
  fs::path config_path;
  std::vector<std::string> sets;
  std::optional<std::size_t> workers;
  bool force = false;
  bool dump_config = false;
  // config path -> raw flag text
  std::map<std::string, std::string> overrides;
};

/// Registers a subcommand flag that writes one config path.
void bind(CLI::App* sub, Options& opts, const std::string& flag, const std::string& path, const std::string& help) {
  sub->add_option_function<std::string>(
      flag, [&opts, path](const std::string& v) { opts.overrides[path] = v; }, help + " [" + path + "]");
}

RunConfig resolve_config(const Options& opts) {
  fs::path path = opts.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("SPECREC_CONFIG"); env && *env) path = env;
  }
  RunConfig config = path.empty() ? RunConfig() : RunConfig::from_file(path);
  for (const auto& [key, value] : opts.overrides) config.set(key, parse_flag_value(value));
  for (const auto& s : opts.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw InputError("--set expects key=value, got '" + s + "'");
    config.set(s.substr(0, eq), parse_flag_value(s.substr(eq + 1)));
  }
  if (opts.workers) config.set("workers", *opts.workers);
  return config;
}

void report_outputs(const OutputSet& outs) {
  for (const auto& p : outs.finals()) std::cout << "wrote " << p.string() << "\n";
}

struct Inputs {
  fs::path log, split, graph, id_emb, text_emb, checkpoint, in_emb;
};

struct Outputs {
  fs::path out, text_out, log_out, per_user, out_dir;
};

void ensure_given(const fs::path& p, const std::string& flag) {
  if (p.empty()) throw InputError(flag + " is required");
}

void check_hash(bool force, const std::string& what, const std::string& expected, const std::string& actual) {
  if (expected == actual) return;
  const std::string msg = what + " hash mismatch: expected " + expected + ", found " + actual;
  if (!force) throw ProtocolError(msg + " (use --force to override)");
  std::cerr << "warning: " << msg << "\n";
}

std::string header_string(const json& header, const char* key) {
  return header.contains(key) && header[key].is_string() ? header[key].get<std::string>() : std::string();
}

// ---------------------------------------------------------------------------

int cmd_synth(const RunConfig& config, const Outputs& o) {
  ensure_given(o.out, "--out");
  OutputSet outs({});
  const auto data = synthesize(config.synth());
  json meta = sidecar(config, "synth", "interaction-log");
  meta["synth"] = config.json()["synth"];
  meta["events"] = data.log.size();
  write_with_sidecar(outs, o.out, log_to_tsv(data.log), meta);
  outs.commit();
  report_outputs(outs);
  return 0;
}

int cmd_ingest(const RunConfig& config, const Inputs& in, const Outputs& o) {
  ensure_given(in.log, "--input");
  ensure_given(o.out, "--out");
  OutputSet outs({in.log});
  const auto& data = config.json()["data"];
  const auto log = ingest(in.log, parse_log_format(data["format"].get<std::string>()));
  const auto split = build_split(log, data["min_interactions"].get<std::size_t>(), data["max_seq_len"].get<std::size_t>());
  json j = split.to_json();
  j["config_hash"] = config.hash();
  write_text_file(outs.stage(o.out), j.dump() + "\n");
  outs.commit();
  std::cout << split.summary_json().dump(2) << "\n";
  report_outputs(outs);
  return 0;
}

int cmd_build_graph(const RunConfig& config, const Inputs& in, const Outputs& o) {
  ensure_given(in.split, "--split");
  ensure_given(o.out, "--out");
  OutputSet outs({in.split});
  const auto split = load_split(in.split);
  auto graph = build_cooccurrence(split, config.json()["graph"]["binarize"].get<bool>());
  graph.meta()["config_hash"] = config.hash();
  graph.meta()["split"] = split.fingerprint();
  save_graph(graph, outs.stage(o.out));
  outs.commit();
  std::cout << graph.header().dump(2) << "\n";
  report_outputs(outs);
  return 0;
}

int cmd_pretrain(const RunConfig& config, const Inputs& in, const Outputs& o) {
  ensure_given(in.split, "--split");
  if (o.out.empty() && o.text_out.empty()) throw InputError("pretrain needs --out and/or --text-out");
  OutputSet outs({in.split, in.in_emb});
  const auto split = load_split(in.split);
  const auto& emb = config.json()["embeddings"];
  if (!o.out.empty()) {
    EmbeddingTable table;
    if (!in.in_emb.empty()) {
      table = load_external(in.in_emb, split, emb["d_id"].get<std::size_t>());
    } else {
      auto result = pretrain_id_embeddings(split, config.pretrain());
      table = std::move(result.table);
      table.meta["epoch_loss"] = result.epoch_loss;
    }
    table.meta["config_hash"] = config.hash();
    table.meta["split"] = split.fingerprint();
    save_embeddings(table, outs.stage(o.out));
  }
  if (!o.text_out.empty()) {
    auto text = text_surrogate_embeddings(split, emb["d_text"].get<std::size_t>(), emb["text_seed"].get<std::uint64_t>(),
                                          emb["text_buckets"].get<std::size_t>());
    text.meta["config_hash"] = config.hash();
    text.meta["split"] = split.fingerprint();
    save_embeddings(text, outs.stage(o.text_out));
  }
  outs.commit();
  report_outputs(outs);
  return 0;
}

int cmd_glpf(const RunConfig& config, const Inputs& in, const Outputs& o) {
  ensure_given(in.graph, "--graph");
  ensure_given(in.in_emb, "--input");
  ensure_given(o.out, "--out");
  OutputSet outs({in.graph, in.in_emb});
  const auto graph = load_graph(in.graph);
  const auto input = load_embeddings(in.in_emb);
  if (input.n_items() != graph.n_items()) throw InputError("glpf: graph and embedding table disagree on the item count");
  const auto spec = config.glpf_spec();
  EmbeddingTable out;
  out.provenance = input.provenance;
  out.meta = input.meta;
  out.rows = config.glpf_enabled() ? polynomial_filter(graph, spec, input.rows, config.workers()) : input.rows;
  out.meta["config_hash"] = config.hash();
  out.meta["graph"] = graph.provenance();
  out.meta["glpf"] = {{"enabled", config.glpf_enabled()}, {"theta", spec.theta}, {"input", input.content_hash()}};
  save_embeddings(out, outs.stage(o.out));
  outs.commit();
  report_outputs(outs);
  return 0;
}

struct LoadedModel {
  SplitDataset split;
  EmbeddingTable id, text;
};

LoadedModel load_model_inputs(const Inputs& in, std::size_t d_id, std::size_t d_text) {
  ensure_given(in.split, "--split");
  ensure_given(in.id_emb, "--id-emb");
  ensure_given(in.text_emb, "--text-emb");
  LoadedModel m{load_split(in.split), load_embeddings(in.id_emb, d_id), load_embeddings(in.text_emb, d_text)};
  if (m.id.n_items() != m.split.n_items() || m.text.n_items() != m.split.n_items()) {
    throw InputError("embedding tables and split disagree on the item count");
  }
  return m;
}

json train_header(const RunConfig& config, const LoadedModel& m) {
  return {{"config_hash", config.hash()},
          {"config", config.json()},
          {"split", m.split.fingerprint()},
          {"id_embeddings", m.id.content_hash()},
          {"text_embeddings", m.text.content_hash()},
          {"graph", m.id.meta.value("graph", "")}};
}

TrainResult run_training(const RunConfig& config, const RecModel& model, const SplitDataset& split, TrainConfig tc,
                         std::vector<json>* log) {
  return train(model, split, tc, [&](const EpochLog& e) {
    std::cerr << "epoch " << e.epoch << " loss " << format_double(e.loss) << " valid_ndcg "
              << format_double(e.valid_ndcg) << "\n";
    if (log) {
      json j = e.to_json();
      j["config_hash"] = config.hash();
      log->push_back(std::move(j));
    }
  });
}

int cmd_train(const RunConfig& config, const Inputs& in, const Outputs& o) {
  ensure_given(o.out, "--out");
  OutputSet outs({in.split, in.id_emb, in.text_emb});
  const auto& emb = config.json()["embeddings"];
  const auto m = load_model_inputs(in, emb["d_id"].get<std::size_t>(), emb["d_text"].get<std::size_t>());
  const auto bb = config.backbone();
  const RecModel model(m.id, m.text, FusionMLP(m.id.dim() + m.text.dim(), bb.d_model, config.mlp()), bb);
  TrainConfig tc = config.train();
  tc.checkpoint_header = train_header(config, m);
  tc.failure_checkpoint = fs::path(o.out).concat(".failed");
  std::vector<json> log;
  const auto result = run_training(config, model, m.split, tc, &log);
  Checkpoint ckpt;
  ckpt.header = tc.checkpoint_header;
  ckpt.header["backbone"] = backbone_config_json(bb);
  ckpt.header["backbone_hash"] = result.backbone_hash_after;
  ckpt.header["epoch"] = result.best_epoch;
  ckpt.header["best_valid_ndcg"] = result.best_ndcg;
  ckpt.header["train_seed"] = tc.seed;
  ckpt.header["positions"] = train_positions_name(result.positions);
  ckpt.mlp = result.mlp;
  save_checkpoint(ckpt, outs.stage(o.out));
  if (!o.log_out.empty()) {
    std::string lines;
    for (const auto& j : log) lines += j.dump() + "\n";
    write_text_file(outs.stage(o.log_out), lines);
  }
  outs.commit();
  std::cout << "best epoch " << result.best_epoch << " valid ndcg@" << tc.eval.k << " "
            << format_double(result.best_ndcg) << "\n";
  report_outputs(outs);
  return 0;
}

/// Rebuilds the trained model and checks every recorded input hash.
RecModel restore_model(const Checkpoint& ckpt, const LoadedModel& m, const fs::path& graph_path, bool force,
                       std::optional<bool> tfm_override = std::nullopt) {
  const auto& h = ckpt.header;
  check_hash(force, "split", header_string(h, "split"), m.split.fingerprint());
  check_hash(force, "id embedding", header_string(h, "id_embeddings"), m.id.content_hash());
  check_hash(force, "text embedding", header_string(h, "text_embeddings"), m.text.content_hash());
  if (!graph_path.empty() && !header_string(h, "graph").empty()) {
    const auto graph = load_graph(graph_path);
    check_hash(force, "graph", header_string(h, "graph"), graph.provenance());
  }
  if (!h.contains("backbone")) throw InputError("checkpoint has no backbone configuration");
  auto bb = backbone_config_from_json(h["backbone"]);
  const std::string expected_backbone = header_string(h, "backbone_hash");
  if (tfm_override) bb.tfm_enabled = *tfm_override;
  RecModel model(m.id, m.text, ckpt.mlp, bb);
  check_hash(force, "backbone", expected_backbone, model.backbone().hash());
  return model;
}

int cmd_evaluate(const RunConfig& config, const Inputs& in, const Outputs& o, const std::string& phase_text,
                 const std::string& baseline, bool force) {
  ensure_given(o.out, "--out");
  const Phase phase = phase_text == "valid" ? Phase::kValid : Phase::kTest;
  if (phase_text != "valid" && phase_text != "test") throw InputError("--phase must be valid or test");
  OutputSet outs({in.split, in.id_emb, in.text_emb, in.checkpoint, in.graph});
  const EvalConfig ec = config.eval();
  MetricsReport report;
  if (baseline == "random" || baseline == "popularity") {
    ensure_given(in.split, "--split");
    const auto split = load_split(in.split);
    const Scorer s = baseline == "random" ? random_scorer(ec.seed) : popularity_scorer(split);
    report = evaluate(split, phase, s, ec, baseline);
  } else if (baseline == "model") {
    ensure_given(in.checkpoint, "--checkpoint");
    if (!fs::exists(in.checkpoint)) throw InputError("checkpoint not found: " + in.checkpoint.string());
    const auto ckpt = load_checkpoint(in.checkpoint);
    const auto m = load_model_inputs(in, 0, 0);
    const auto model = restore_model(ckpt, m, in.graph, force);
    report = evaluate(m.split, phase, model_scorer(model, m.split), ec, "model");
  } else {
    throw InputError("--baseline must be model, random or popularity");
  }
  json j = report.to_json();
  j["config_hash"] = config.hash();
  write_json(outs, o.out, j);
  if (!o.per_user.empty()) {
    write_with_sidecar(outs, o.per_user, report.per_user_csv(), sidecar(config, "evaluate", "per-user-metrics"));
  }
  outs.commit();
  std::cout << j.dump(2) << "\n";
  report_outputs(outs);
  return 0;
}

int cmd_analyze(const RunConfig& config, const Inputs& in, const Outputs& o, const std::string& tfm_mode, bool force) {
  ensure_given(in.graph, "--graph");
  ensure_given(o.out_dir, "--out-dir");
  std::vector<bool> modes;
  if (tfm_mode == "on") {
    modes = {true};
  } else if (tfm_mode == "off") {
    modes = {false};
  } else if (tfm_mode == "both") {
    modes = {false, true};
  } else {
    throw InputError("--tfm must be on, off or both");
  }
  OutputSet outs({in.split, in.id_emb, in.text_emb, in.checkpoint, in.graph});
  const auto m = load_model_inputs(in, 0, 0);
  const auto graph = load_graph(in.graph);
  if (graph.n_items() != m.split.n_items()) throw InputError("analyze: graph and split disagree on the item count");
  std::optional<Checkpoint> ckpt;
  if (!in.checkpoint.empty()) ckpt = load_checkpoint(in.checkpoint);
  const auto sequences = analysis_sequences(m.split);
  const auto ac = config.analysis();
  const std::string tag = config.hash();
  json summary = {{"config_hash", tag}, {"runs", json::array()}};
  for (const bool on : modes) {
    std::optional<RecModel> model;
    if (ckpt) {
      model.emplace(restore_model(*ckpt, m, in.graph, force, on));
    } else {
      auto bb = config.backbone();
      bb.tfm_enabled = on;
      model.emplace(m.id, m.text, FusionMLP(m.id.dim() + m.text.dim(), bb.d_model, config.mlp()), bb);
    }
    const auto profile = trace_spectral_profile(*model, sequences, graph, ac);
    const std::string stem = std::string("profile-tfm_") + (on ? "on" : "off") + "-" + tag;
    json pj = profile.to_json();
    pj["config_hash"] = tag;
    pj["tfm"] = on;
    pj["attenuation"] = attenuation_json(attenuation_metric(profile));
    write_json(outs, o.out_dir / (stem + ".json"), pj);
    write_with_sidecar(outs, o.out_dir / (stem + ".csv"), profile.to_csv(), sidecar(config, "analyze", "spectral-profile"));
    const auto shares = profile.shares();
    summary["runs"].push_back({{"tfm", on},
                               {"users", profile.users},
                               {"final_band1_share", shares(profile.n_layers() - 1, 0)},
                               {"input_band1_share", shares(0, 0)}});
  }
  outs.commit();
  std::cout << summary.dump(2) << "\n";
  report_outputs(outs);
  return 0;
}

int cmd_probe(const RunConfig& config, const Outputs& o, bool filter_off) {
  auto pc = config.probe();
  pc.filter_enabled = !filter_off;
  OutputSet outs({});
  const auto report = smoothing_probe(pc);
  json j = report.to_json();
  j["config_hash"] = config.hash();
  if (!o.out.empty()) write_json(outs, o.out, j);
  outs.commit();
  std::cout << j.dump(2) << "\n";
  report_outputs(outs);
  return 0;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw InputError("--values: cannot parse '" + tok + "'");
    }
  }
  if (out.empty()) throw InputError("--values is empty");
  return out;
}

int cmd_sweep(const RunConfig& config, const Inputs& in, const Outputs& o, const std::string& param,
              const std::string& values) {
  ensure_given(o.out, "--out");
  if (param != "alpha" && param != "cutoff" && param != "fraction") {
    throw InputError("--param must be alpha, cutoff or fraction");
  }
  const auto grid = parse_grid(values);
  OutputSet outs({in.split, in.id_emb, in.text_emb, in.graph});
  const auto m = load_model_inputs(in, 0, 0);
  std::optional<CooccurrenceGraph> graph;
  if (param != "cutoff" || config.glpf_enabled()) {
    ensure_given(in.graph, "--graph");
    graph = load_graph(in.graph);
    if (graph->n_items() != m.split.n_items()) throw InputError("sweep: graph and split disagree on the item count");
  }
  const std::size_t workers = config.workers();

  // Trains from scratch on the given ID table and returns test metrics.
  auto run_point = [&](const Matrix& id_rows, const RunConfig& point) {
    EmbeddingTable id = m.id;
    id.rows = id_rows;
    const auto bb = point.backbone();
    const RecModel model(id, m.text, FusionMLP(id.dim() + m.text.dim(), bb.d_model, point.mlp()), bb);
    const auto result = run_training(point, model, m.split, point.train(), nullptr);
    const auto trained = model.with_mlp(result.mlp);
    return std::make_pair(result, evaluate(m.split, Phase::kTest, model_scorer(trained, m.split), point.eval()));
  };

  std::string csv;
  if (param == "fraction") {
    const auto rows = truncation_sweep(*graph, m.id.rows, grid, [&](const Matrix& e) {
      return run_point(e, config).second.ndcg;
    });
    csv = sweep_csv(rows, "p");
  } else {
    csv = param + ",best_epoch,valid_ndcg,test_ndcg,test_recall\n";
    for (const double v : grid) {
      RunConfig point = config;
      point.set(param == "alpha" ? "glpf.alpha" : "tfm.cutoff", v);
      const Matrix id_rows = point.glpf_enabled() ? polynomial_filter(*graph, point.glpf_spec(), m.id.rows, workers) : m.id.rows;
      const auto [result, report] = run_point(id_rows, point);
      csv += format_double(v) + "," + std::to_string(result.best_epoch) + "," + format_double(result.best_ndcg) + "," +
             format_double(report.ndcg) + "," + format_double(report.recall) + "\n";
      std::cerr << param << " " << format_double(v) << " test_ndcg " << format_double(report.ndcg) << "\n";
    }
  }
  json meta = sidecar(config, "sweep", "sweep");
  meta["param"] = param;
  meta["values"] = grid;
  write_with_sidecar(outs, o.out, csv, meta);
  outs.commit();
  std::cout << csv;
  report_outputs(outs);
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"specrec: spectral filtering pipeline for sequential recommendation"};
  app.require_subcommand(1);
  Options opts;
  Inputs in;
  Outputs out;
  std::string phase = "test", baseline = "model", tfm_mode = "both", param, values;
  bool filter_off = false;

  app.add_option("--config", opts.config_path, "JSON config file (default: $SPECREC_CONFIG)");
  app.add_option("--set", opts.sets, "Override a config path, key=value (repeatable)");
  app.add_option("--workers", opts.workers, "Worker threads, 0 = all cores");
  app.add_flag("--force", opts.force, "Proceed despite artifact hash mismatches");
  app.add_flag("--dump-config", opts.dump_config, "Print the effective config before running");
  app.fallthrough();

  auto* synth = app.add_subcommand("synth", "Generate a synthetic interaction log");
  synth->add_option("--out", out.out, "Output TSV log")->required();
  bind(synth, opts, "--users", "synth.users", "Number of users");
  bind(synth, opts, "--items", "synth.items", "Number of items");
  bind(synth, opts, "--mean-length", "synth.mean_length", "Mean sequence length");
  bind(synth, opts, "--rho", "synth.rho", "Locality correlation");
  bind(synth, opts, "--seed", "synth.seed", "Random seed");

  auto* ingest_cmd = app.add_subcommand("ingest", "Filter and split an interaction log");
  ingest_cmd->add_option("--input", in.log, "Interaction log")->required();
  ingest_cmd->add_option("--out", out.out, "Output split JSON")->required();
  bind(ingest_cmd, opts, "--format", "data.format", "tsv or jsonl");
  bind(ingest_cmd, opts, "--min-interactions", "data.min_interactions", "k-core threshold");
  bind(ingest_cmd, opts, "--max-seq-len", "data.max_seq_len", "Model input length");

  auto* graph_cmd = app.add_subcommand("build-graph", "Build the item co-occurrence graph");
  graph_cmd->add_option("--split", in.split, "Split JSON")->required();
  graph_cmd->add_option("--out", out.out, "Output graph file")->required();
  bind(graph_cmd, opts, "--binarize", "graph.binarize", "Binarize user-item counts");

  auto* pretrain_cmd = app.add_subcommand("pretrain", "Produce ID and text embedding tables");
  pretrain_cmd->add_option("--split", in.split, "Split JSON")->required();
  pretrain_cmd->add_option("--out", out.out, "Output ID embedding table");
  pretrain_cmd->add_option("--text-out", out.text_out, "Output text embedding table");
  pretrain_cmd->add_option("--external", in.in_emb, "Align external ID vectors instead of training");
  bind(pretrain_cmd, opts, "--dim", "embeddings.d_id", "ID embedding dimension");
  bind(pretrain_cmd, opts, "--text-dim", "embeddings.d_text", "Text embedding dimension");
  bind(pretrain_cmd, opts, "--epochs", "embeddings.epochs", "Skip-gram epochs");
  bind(pretrain_cmd, opts, "--seed", "embeddings.seed", "Skip-gram seed");

  auto* glpf_cmd = app.add_subcommand("glpf", "Low-pass filter an ID embedding table on the item graph");
  glpf_cmd->add_option("--graph", in.graph, "Graph file")->required();
  glpf_cmd->add_option("--input", in.in_emb, "Input embedding table")->required();
  glpf_cmd->add_option("--out", out.out, "Output embedding table")->required();
  bind(glpf_cmd, opts, "--alpha", "glpf.alpha", "First-order strength");
  bind(glpf_cmd, opts, "--theta", "glpf.theta", "Polynomial coefficients as a JSON array");

  auto add_model_inputs = [&](CLI::App* sub) {
    sub->add_option("--split", in.split, "Split JSON")->required();
    sub->add_option("--id-emb", in.id_emb, "ID embedding table")->required();
    sub->add_option("--text-emb", in.text_emb, "Text embedding table")->required();
  };
  auto add_tfm_flags = [&](CLI::App* sub) {
    bind(sub, opts, "--cutoff", "tfm.cutoff", "Butterworth cutoff");
    bind(sub, opts, "--order", "tfm.order", "Butterworth order");
  };

  auto* train_cmd = app.add_subcommand("train", "Train the fusion MLP over the frozen backbone");
  add_model_inputs(train_cmd);
  train_cmd->add_option("--out", out.out, "Output checkpoint")->required();
  train_cmd->add_option("--log", out.log_out, "Per-epoch JSON lines");
  add_tfm_flags(train_cmd);
  bind(train_cmd, opts, "--tfm-enabled", "tfm.enabled", "true or false");
  bind(train_cmd, opts, "--lr", "train.lr", "Learning rate");
  bind(train_cmd, opts, "--epochs", "train.epochs", "Maximum epochs");
  bind(train_cmd, opts, "--patience", "train.patience", "Early-stopping patience");
  bind(train_cmd, opts, "--batch", "train.batch", "Batch size");
  bind(train_cmd, opts, "--seed", "train.seed", "Training seed");
  bind(train_cmd, opts, "--positions", "train.positions", "auto, all, last or prefixes");
  bind(train_cmd, opts, "--prefix-samples", "train.prefix_samples", "Random prefixes per sequence in last mode");

  auto* eval_cmd = app.add_subcommand("evaluate", "Leave-one-out evaluation");
  eval_cmd->add_option("--split", in.split, "Split JSON")->required();
  eval_cmd->add_option("--id-emb", in.id_emb, "ID embedding table");
  eval_cmd->add_option("--text-emb", in.text_emb, "Text embedding table");
  eval_cmd->add_option("--checkpoint", in.checkpoint, "Trained checkpoint");
  eval_cmd->add_option("--graph", in.graph, "Graph the ID table was filtered on");
  eval_cmd->add_option("--phase", phase, "valid or test")->capture_default_str();
  eval_cmd->add_option("--baseline", baseline, "model, random or popularity")->capture_default_str();
  eval_cmd->add_option("--out", out.out, "Output report JSON")->required();
  eval_cmd->add_option("--per-user", out.per_user, "Per-user CSV");
  bind(eval_cmd, opts, "--seed", "eval.seed", "Candidate sampling seed");

  auto* analyze_cmd = app.add_subcommand("analyze", "Per-layer graph-frequency band energy");
  add_model_inputs(analyze_cmd);
  analyze_cmd->add_option("--graph", in.graph, "Graph file")->required();
  analyze_cmd->add_option("--checkpoint", in.checkpoint, "Trained checkpoint (default: untrained fusion)");
  analyze_cmd->add_option("--tfm", tfm_mode, "on, off or both")->capture_default_str();
  analyze_cmd->add_option("--out-dir", out.out_dir, "Output directory")->required();
  add_tfm_flags(analyze_cmd);
  bind(analyze_cmd, opts, "--bands", "analysis.bands", "Band count");
  bind(analyze_cmd, opts, "--max-users", "analysis.max_users", "Sample size, 0 = all");

  auto* probe_cmd = app.add_subcommand("theorem-probe", "Randomized smoothing probe of the temporal filter");
  probe_cmd->add_option("--out", out.out, "Output report JSON");
  probe_cmd->add_flag("--no-filter", filter_off, "Probe the identity instead of the filter");
  add_tfm_flags(probe_cmd);
  bind(probe_cmd, opts, "--family", "probe.family", "ring or locality");
  bind(probe_cmd, opts, "--rho", "probe.rho", "Locality correlation");
  bind(probe_cmd, opts, "--trials", "probe.trials", "Trial count");
  bind(probe_cmd, opts, "--seed", "probe.seed", "Probe seed");
  bind(probe_cmd, opts, "--laplacian", "probe.laplacian", "combinatorial or normalized");

  auto* sweep_cmd = app.add_subcommand("sweep", "Train and evaluate over a hyperparameter grid");
  add_model_inputs(sweep_cmd);
  sweep_cmd->add_option("--graph", in.graph, "Graph file");
  sweep_cmd->add_option("--param", param, "alpha, cutoff or fraction")->required();
  sweep_cmd->add_option("--values", values, "Comma-separated grid")->required();
  sweep_cmd->add_option("--out", out.out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    std::cerr << (subs.empty() ? app.help() : subs.front()->help());
    return 1;
  }

  const RunConfig config = resolve_config(opts);
  if (opts.dump_config) std::cout << config.json().dump(2) << "\n";
  if (app.got_subcommand(synth)) return cmd_synth(config, out);
  if (app.got_subcommand(ingest_cmd)) return cmd_ingest(config, in, out);
  if (app.got_subcommand(graph_cmd)) return cmd_build_graph(config, in, out);
  if (app.got_subcommand(pretrain_cmd)) return cmd_pretrain(config, in, out);
  if (app.got_subcommand(glpf_cmd)) return cmd_glpf(config, in, out);
  if (app.got_subcommand(train_cmd)) return cmd_train(config, in, out);
  if (app.got_subcommand(eval_cmd)) return cmd_evaluate(config, in, out, phase, baseline, opts.force);
  if (app.got_subcommand(analyze_cmd)) return cmd_analyze(config, in, out, tfm_mode, opts.force);
  if (app.got_subcommand(probe_cmd)) return cmd_probe(config, out, filter_off);
  if (app.got_subcommand(sweep_cmd)) return cmd_sweep(config, in, out, param, values);
  return 1;
}

}  // namespace
}  // namespace specrec

int main(int argc, char** argv) {
  try {
    return specrec::run(argc, argv);
  } catch (const specrec::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const specrec::ProtocolError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const specrec::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
