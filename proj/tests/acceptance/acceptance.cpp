// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance runner. One criterion per invocation, one PASS/FAIL line each.
// Exit codes: 0 pass, 1 fail, 77 skipped (missing external data).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "specrec/analysis.hpp"
#include "specrec/dataset.hpp"
#include "specrec/dft.hpp"
#include "specrec/eigen.hpp"
#include "specrec/embedding.hpp"
#include "specrec/errors.hpp"
#include "specrec/evaluate.hpp"
#include "specrec/glpf.hpp"
#include "specrec/graph.hpp"
#include "specrec/io.hpp"
#include "specrec/model.hpp"
#include "specrec/spectral.hpp"
#include "specrec/tfm.hpp"
#include "specrec/train.hpp"
#include "test_support.hpp"

using namespace specrec;
using specrec::testing::random_adjacency;
using specrec::testing::random_matrix;

namespace {

// Pinned tolerances.
constexpr double kOracleRelTol = 1e-10;
constexpr double kRingEigenTol = 1e-9;
constexpr double kDftSpanTol = 1e-8;
constexpr double kParsevalTol = 1e-10;
constexpr double kReconstructionTol = 1e-8;
constexpr double kRoundtripTol = 1e-12;
constexpr double kGradientTol = 1e-4;
constexpr double kCutoffGainTol = 1e-12;
constexpr double kEnergySlack = 1e-12;
constexpr double kRandomRecall = 10.0 / 101.0;
constexpr double kRandomRecallTol = 0.02;
constexpr double kTrendPassRate = 0.95;
constexpr double kTfmRatioMax = 3.0;
constexpr double kAttentionRatioMin = 3.5;

enum class Status { kPass, kFail, kSkip };

struct Outcome {
  Status status = Status::kPass;
  std::vector<std::string> lines;

  void check(bool ok, const std::string& what) {
    lines.push_back(std::string(ok ? "  ok    " : "  FAIL  ") + what);
    if (!ok) status = Status::kFail;
  }
  void note(const std::string& what) { lines.push_back("  info  " + what); }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

double relative_fro(const Matrix& a, const Matrix& b) {
  const double scale = std::max(frobenius_norm(b), 1e-300);
  return frobenius_norm(a - b) / scale;
}

// 1. Polynomial G-LPF against the dense spectral oracle.
Outcome criterion_1() {
  Outcome out;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::size_t> size(5, 200);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  double worst = 0.0;
  std::size_t cases = 0;
  for (int g = 0; g < 100; ++g) {
    const std::size_t n = size(rng);
    const auto graph = CooccurrenceGraph::from_dense(random_adjacency(n, rng, 0.1));
    const SpectralBasis basis = spectral_basis(graph.dense_laplacian());
    const Matrix e = random_matrix(n, 50, rng);
    std::vector<PolyFilterSpec> specs;
    for (double a : {0.0, 0.25, 0.5, 1.0}) specs.push_back(PolyFilterSpec::first_order(a));
    specs.push_back({{coef(rng), coef(rng), coef(rng), coef(rng)}});
    for (const auto& spec : specs) {
      const Matrix fast = polynomial_filter(graph, spec, e);
      const Matrix oracle =
          spectral_oracle_filter(basis, [&](double lambda, std::size_t, std::size_t) { return spec.response(lambda); }, e);
      worst = std::max(worst, relative_fro(fast, oracle));
      ++cases;
    }
  }
  const double elapsed = seconds_since(t0);
  out.check(worst <= kOracleRelTol, "worst relative error " + fmt(worst) + " over " + std::to_string(cases) +
                                        " (graph, spec) cases <= " + fmt(kOracleRelTol));
  out.check(elapsed < 60.0, "runtime " + fmt(elapsed) + " s < 60 s");
  return out;
}

// 2. Ring graph eigenvalues and DFT span.
Outcome criterion_2() {
  Outcome out;
  double worst_eig = 0.0, worst_span = 0.0;
  for (std::size_t t = 3; t <= 64; ++t) {
    const auto basis = ring_graph_basis(t);
    std::vector<double> expected(t);
    for (std::size_t k = 0; k < t; ++k) {
      expected[k] = 2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(t));
    }
    std::sort(expected.begin(), expected.end());
    std::vector<double> got = basis.eigenvalues;
    std::sort(got.begin(), got.end());
    for (std::size_t k = 0; k < t; ++k) worst_eig = std::max(worst_eig, std::abs(got[k] - expected[k]));
    worst_span = std::max(worst_span, dft_span_residual(basis));
  }
  out.check(worst_eig <= kRingEigenTol, "eigenvalue multiset error " + fmt(worst_eig) + " <= " + fmt(kRingEigenTol) +
                                            " for T in [3, 64]");
  out.check(worst_span < kDftSpanTol, "DFT span residual " + fmt(worst_span) + " < " + fmt(kDftSpanTol));
  return out;
}

// 3. Smoothing probe: exact on rings, statistical on locality graphs.
Outcome criterion_3() {
  Outcome out;
  const auto t0 = Clock::now();
  ProbeConfig ring;
  ring.family = GraphFamily::kRing;
  ring.trials = 1000;
  const auto r = smoothing_probe(ring);
  out.check(r.rayleigh_violations == 0,
            "ring: " + std::to_string(r.rayleigh_violations) + " Rayleigh violations in " + std::to_string(r.trials));
  out.check(r.mean_smoothness_after < r.mean_smoothness_before,
            "ring: mean quadratic form " + fmt(r.mean_smoothness_before) + " -> " + fmt(r.mean_smoothness_after));
  for (double rho : {0.3, 0.5, 0.8}) {
    ProbeConfig c;
    c.family = GraphFamily::kLocality;
    c.rho = rho;
    c.trials = 1000;
    c.seed = 1 + static_cast<std::uint64_t>(rho * 10);
    const auto rep = smoothing_probe(c);
    const std::string tag = "locality rho=" + fmt(rho) + ": ";
    out.check(rep.rayleigh_rate() <= rep.threshold, tag + "violation rate " + fmt(rep.rayleigh_rate()) +
                                                        " <= pilot threshold " + fmt(rep.threshold) + " (pilot " +
                                                        std::to_string(rep.pilot_rayleigh_violations) + "/" +
                                                        std::to_string(rep.pilot_trials) + ")");
    out.check(rep.mean_smoothness_after < rep.mean_smoothness_before,
              tag + "mean quadratic form " + fmt(rep.mean_smoothness_before) + " -> " + fmt(rep.mean_smoothness_after));
  }
  const double elapsed = seconds_since(t0);
  out.check(elapsed < 120.0, "runtime " + fmt(elapsed) + " s < 120 s");
  return out;
}

// 4. Numerical core.
Outcome criterion_4() {
  Outcome out;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(404);
  std::normal_distribution<double> gauss(0.0, 1.0);

  double gft_parseval = 0.0, recon = 0.0;
  for (std::size_t n : {8u, 33u, 100u}) {
    const Matrix w = random_adjacency(n, rng, 0.2);
    const Matrix l = normalized_laplacian(w);
    const auto eig = sym_eigendecompose(l);
    recon = std::max(recon, reconstruction_error(eig, l));
    const SpectralBasis basis{eig.values, eig.vectors};
    const Matrix x = random_matrix(n, 5, rng);
    const Matrix c = gft(basis, x);
    gft_parseval = std::max(gft_parseval, std::abs(squared_norm(c) - squared_norm(x)) / squared_norm(x));
  }
  out.check(gft_parseval <= kParsevalTol, "GFT Parseval relative error " + fmt(gft_parseval));
  out.check(recon <= kReconstructionTol, "eigendecomposition reconstruction " + fmt(recon));

  double dft_parseval = 0.0, roundtrip = 0.0;
  for (std::size_t n : {1u, 2u, 7u, 16u, 50u, 256u, 1000u}) {
    std::vector<Complex> x(n);
    for (auto& v : x) v = {gauss(rng), gauss(rng)};
    const auto f = dft(x, Direction::kForward);
    const auto back = dft(f, Direction::kInverse);
    double ex = 0.0, ef = 0.0, err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ex += std::norm(x[i]);
      ef += std::norm(f[i]);
      err = std::max(err, std::abs(back[i] - x[i]));
      scale = std::max(scale, std::abs(x[i]));
    }
    dft_parseval = std::max(dft_parseval, std::abs(ef / static_cast<double>(n) - ex) / ex);
    roundtrip = std::max(roundtrip, err / scale);
  }
  out.check(dft_parseval <= kParsevalTol, "DFT Parseval relative error " + fmt(dft_parseval));
  out.check(roundtrip <= kRoundtripTol, "DFT roundtrip relative error " + fmt(roundtrip));

  // Gradient of the sampled-softmax loss through fusion MLP, frozen backbone and TFM.
  const std::size_t n_items = 30;
  EmbeddingTable id, text;
  id.rows = random_matrix(n_items, 6, rng);
  text.rows = random_matrix(n_items, 4, rng);
  text.provenance = "text";
  BackboneConfig bc;
  bc.d_model = 16;
  bc.heads = 2;
  bc.layers = 4;
  bc.tfm_enabled = true;
  const RecModel model(id, text, FusionMLP(10, 16, MlpConfig{}), bc);
  TrainingExample ex;
  ex.inputs = {{3, 7, 7, 1, 12, 20, 4, 9}};
  ex.rows = {{7}};
  ex.targets = {{2}};
  ex.negatives = {0, 5, 6, 10, 28};
  Tape tape;
  std::vector<Var> leaves;
  const Var loss = example_loss(tape, model, ex, leaves);
  const Gradients g = tape.backward(loss);
  std::vector<Matrix> analytic;
  std::vector<std::string> names;
  for (std::size_t k = 0; k < leaves.size(); ++k) {
    analytic.push_back(g.of(leaves[k]));
    names.emplace_back(FusionMLP::kParamNames[k]);
  }
  const auto report = finite_difference_check(
      [&](const std::vector<Matrix>& p) {
        Tape t;
        std::vector<Var> l;
        return example_loss(t, model.with_mlp(FusionMLP(p, Activation::kGelu)), ex, l).value()(0, 0);
      },
      model.mlp().params(), analytic, names);
  out.check(report.worst <= kGradientTol,
            "gradient check worst relative error " + fmt(report.worst) + " (" + report.worst_param + ")");
  const double elapsed = seconds_since(t0);
  out.check(elapsed < 300.0, "runtime " + fmt(elapsed) + " s < 300 s");
  return out;
}

// 5. Butterworth gain contract.
Outcome criterion_5() {
  Outcome out;
  // (cutoff, T, k) with bin k sitting exactly on the cutoff.
  const std::vector<std::tuple<double, std::size_t, std::size_t>> on_cutoff = {
      {0.25, 8, 1}, {0.5, 8, 2}, {0.3, 20, 3}, {0.125, 64, 4}, {1.0, 10, 5}};
  double worst_cut = 0.0;
  for (const auto& [wc, t, k] : on_cutoff) {
    for (int order : {1, 2, 4, 8}) {
      const auto gains = butterworth_gains({wc, order}, t);
      worst_cut = std::max(worst_cut, std::abs(gains[k] - 1.0 / std::sqrt(2.0)));
    }
  }
  out.check(worst_cut <= kCutoffGainTol, "gain at cutoff off 1/sqrt(2) by " + fmt(worst_cut));

  bool monotone = true, dc = true;
  for (double wc : {0.05, 0.1, 0.3, 0.7, 1.0}) {
    for (int order : {1, 2, 3, 6}) {
      for (std::size_t t : {1u, 2u, 5u, 16u, 31u, 128u}) {
        const auto gains = butterworth_gains({wc, order}, t);
        dc = dc && gains[0] == 1.0;
        for (std::size_t k = 1; k <= t / 2; ++k) monotone = monotone && gains[k] <= gains[k - 1];
      }
    }
  }
  out.check(dc, "DC gain exactly 1");
  out.check(monotone, "gains nonincreasing in frequency");

  std::mt19937_64 rng(505);
  std::uniform_int_distribution<std::size_t> len(1, 80), dim(1, 16);
  std::uniform_real_distribution<double> cut(0.01, 1.0);
  std::uniform_int_distribution<int> ord(1, 6);
  std::size_t expansive = 0;
  double worst_ratio = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Matrix h = random_matrix(len(rng), dim(rng), rng);
    const Matrix f = tfm_apply(h, {cut(rng), ord(rng)});
    const double ratio = squared_norm(f) / squared_norm(h);
    worst_ratio = std::max(worst_ratio, ratio);
    if (ratio > 1.0 + kEnergySlack) ++expansive;
  }
  out.check(expansive == 0, "energy non-expansive on 1000 random matrices (max ratio " + fmt(worst_ratio) + ")");
  return out;
}

// 6. Evaluation protocol.
Outcome criterion_6() {
  Outcome out;
  const auto r1 = rank_metrics(std::vector<double>{5.0, 1.0, 0.0}, 0);
  out.check(r1.ndcg == 1.0 && r1.recall == 1.0, "rank 1 -> NDCG 1, Recall 1");
  const auto r3 = rank_metrics(std::vector<double>{3.0, 2.0, 1.0, 0.5}, 2);
  out.check(r3.rank == 3 && std::abs(r3.ndcg - 0.5) < 1e-15 && r3.recall == 1.0, "rank 3 -> NDCG 0.5, Recall 1");
  std::vector<double> s11(101, 0.0);
  for (std::size_t i = 0; i < 10; ++i) s11[i] = 1.0;
  s11[50] = 0.5;
  const auto r11 = rank_metrics(s11, 50);
  out.check(r11.rank == 11 && r11.ndcg == 0.0 && r11.recall == 0.0, "rank 11 -> NDCG 0, Recall 0");

  SynthConfig sc;
  sc.users = 1500;
  sc.items = 400;
  sc.seed = 6;
  const auto split = build_split(synthesize(sc).log);
  EvalConfig ec;
  const auto report = evaluate(split, Phase::kTest, random_scorer(ec.seed), ec, "random");
  out.check(report.users >= 1000, std::to_string(report.users) + " evaluated users >= 1000");
  out.check(std::abs(report.recall - kRandomRecall) <= kRandomRecallTol,
            "random Recall@10 " + fmt(report.recall) + " within " + fmt(kRandomRecallTol) + " of " + fmt(kRandomRecall));
  return out;
}

// 6a. Filtering statistics on the public LastFM export (external file).
Outcome criterion_6a() {
  Outcome out;
  const char* path = std::getenv("SPECREC_LASTFM_TSV");
  if (!path || !*path || !std::filesystem::exists(path)) {
    out.status = Status::kSkip;
    out.note("SPECREC_LASTFM_TSV not set or missing; LastFM export unavailable");
    return out;
  }
  const char* format = std::getenv("SPECREC_LASTFM_FORMAT");
  const auto log = ingest(path, parse_log_format(format && *format ? format : "tsv"));
  const auto stats = build_split(log, 5).stats();
  out.check(stats.users == 1090, "users " + std::to_string(stats.users) + " == 1090");
  out.check(stats.items == 3646, "items " + std::to_string(stats.items) + " == 3646");
  out.check(stats.interactions == 52551, "interactions " + std::to_string(stats.interactions) + " == 52551");
  out.check(std::abs(stats.average_length - 48.21) < 0.005, "average length " + fmt(stats.average_length) + " == 48.21");
  return out;
}

struct PipelineInputs {
  SplitDataset split;
  CooccurrenceGraph graph;
  EmbeddingTable id, text;
};

PipelineInputs prepare(const InteractionLog& log, std::size_t max_seq_len, std::uint64_t seed, std::size_t workers,
                       std::optional<PolyFilterSpec> glpf) {
  PipelineInputs p;
  p.split = build_split(log, 5, max_seq_len);
  p.graph = build_cooccurrence(p.split);
  PretrainConfig pc;
  pc.seed = seed;
  p.id = pretrain_id_embeddings(p.split, pc).table;
  if (glpf) p.id.rows = polynomial_filter(p.graph, *glpf, p.id.rows, workers);
  p.text = text_surrogate_embeddings(p.split, 50, seed + 1);
  return p;
}

// 7. Band-1 share at the last layer, TFM on vs off.
Outcome criterion_7() {
  Outcome out;
  const auto t0 = Clock::now();
  const std::size_t reps = 20;
  std::size_t wins = 0;
  double mean_on = 0.0, mean_off = 0.0;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    const std::uint64_t seed = 700 + rep;
    SynthConfig sc;
    sc.users = 500;
    sc.items = 300;
    sc.rho = 0.5;
    sc.seed = seed;
    const auto p = prepare(synthesize(sc).log, 50, seed, 1, std::nullopt);
    const auto sequences = analysis_sequences(p.split);
    AnalysisConfig ac;
    double share[2] = {0.0, 0.0};
    for (int on = 0; on < 2; ++on) {
      BackboneConfig bc;
      bc.seed = mix_seed(seed, 7);
      bc.tfm_enabled = on == 1;
      MlpConfig mc;
      mc.seed = mix_seed(seed, 11);
      const RecModel model(p.id, p.text, FusionMLP(p.id.dim() + p.text.dim(), bc.d_model, mc), bc);
      const auto profile = trace_spectral_profile(model, sequences, p.graph, ac);
      share[on] = profile.shares()(profile.n_layers() - 1, 0);
    }
    mean_off += share[0] / reps;
    mean_on += share[1] / reps;
    if (share[1] > share[0]) ++wins;
  }
  const double rate = static_cast<double>(wins) / reps;
  out.note("mean final-layer band-1 share: TFM off " + fmt(mean_off) + ", on " + fmt(mean_on));
  out.check(rate >= kTrendPassRate, "TFM raised the share in " + std::to_string(wins) + "/" + std::to_string(reps) +
                                        " repetitions (need >= " + fmt(kTrendPassRate) + ")");
  const double elapsed = seconds_since(t0);
  out.check(elapsed < 900.0, "runtime " + fmt(elapsed) + " s < 900 s");
  return out;
}

TrainConfig end_to_end_train_config() {
  TrainConfig tc;
  tc.optim.lr = 1e-2;
  tc.prefix_samples = 4;
  return tc;
}

// 8a. Separable data: every item has one deterministic successor.
Outcome criterion_8a() {
  Outcome out;
  const auto t0 = Clock::now();
  const auto p = prepare(synthesize_successor(200, 120, 12, 8), 50, 8, 1, PolyFilterSpec::first_order(0.3));
  BackboneConfig bc;
  bc.tfm_enabled = true;
  const RecModel model(p.id, p.text, FusionMLP(p.id.dim() + p.text.dim(), bc.d_model, MlpConfig{}), bc);
  TrainConfig tc = end_to_end_train_config();
  tc.epochs = 50;
  tc.patience = 50;
  std::size_t first_perfect = 0;
  double best_recall = 0.0;
  train(model, p.split, tc, [&](const EpochLog& e) {
    best_recall = std::max(best_recall, e.valid_recall);
    if (e.valid_recall == 1.0 && first_perfect == 0) first_perfect = e.epoch;
  });
  out.check(first_perfect > 0, "validation Recall@10 reached 1.0 at epoch " + std::to_string(first_perfect) +
                                   " (best " + fmt(best_recall) + ", limit 50)");
  const double elapsed = seconds_since(t0);
  out.check(elapsed < 3600.0, "runtime " + fmt(elapsed) + " s < 3600 s");
  return out;
}

// 8b. Full pipeline on a LastFM-sized synthetic log against the baseline floors.
Outcome criterion_8b() {
  Outcome out;
  const auto t0 = Clock::now();
  SynthConfig sc;
  sc.users = 1090;
  sc.items = 3646;
  sc.mean_length = 48.0;
  sc.rho = 0.8;
  sc.seed = 8;
  const auto p = prepare(synthesize(sc).log, 50, 8, 1, PolyFilterSpec::first_order(0.3));
  const auto stats = p.split.stats();
  out.note("synthetic log: " + std::to_string(stats.users) + " users, " + std::to_string(stats.items) + " items, " +
           std::to_string(stats.interactions) + " interactions");
  BackboneConfig bc;
  bc.tfm_enabled = true;
  bc.tfm = {0.3, 2};
  const RecModel model(p.id, p.text, FusionMLP(p.id.dim() + p.text.dim(), bc.d_model, MlpConfig{}), bc);
  TrainConfig tc = end_to_end_train_config();
  tc.epochs = 12;
  tc.patience = 4;
  const auto result = train(model, p.split, tc);
  const auto trained = model.with_mlp(result.mlp);
  EvalConfig ec;
  const auto m = evaluate(p.split, Phase::kTest, model_scorer(trained, p.split), ec, "model");
  const auto rnd = evaluate(p.split, Phase::kTest, random_scorer(ec.seed), ec, "random");
  const auto pop = evaluate(p.split, Phase::kTest, popularity_scorer(p.split), ec, "popularity");
  out.note("best epoch " + std::to_string(result.best_epoch) + ", valid NDCG@10 " + fmt(result.best_ndcg));
  out.note("test NDCG@10 model " + fmt(m.ndcg) + ", random " + fmt(rnd.ndcg) + ", popularity " + fmt(pop.ndcg));
  out.note("test Recall@10 model " + fmt(m.recall) + ", random " + fmt(rnd.recall) + ", popularity " + fmt(pop.recall));
  out.check(m.ndcg > rnd.ndcg && m.ndcg > pop.ndcg, "model NDCG@10 beats both floors");
  out.check(m.recall > rnd.recall && m.recall > pop.recall, "model Recall@10 beats both floors");
  const double elapsed = seconds_since(t0);
  out.check(elapsed < 3600.0, "runtime " + fmt(elapsed) + " s < 3600 s");
  return out;
}

// Plain single-head causal attention used as the quadratic reference.
Matrix attention_standin(const Matrix& h) {
  Matrix s = matmul_nt(h, h);
  const double inv = 1.0 / std::sqrt(static_cast<double>(h.cols()));
  for (std::size_t i = 0; i < s.rows(); ++i) {
    auto row = s.row(i);
    double mx = -1e300;
    for (std::size_t j = 0; j <= i; ++j) mx = std::max(mx, row[j] * inv);
    double z = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      row[j] = j <= i ? std::exp(row[j] * inv - mx) : 0.0;
      z += row[j];
    }
    for (double& v : row) v /= z;
  }
  return matmul(s, h);
}

// Median over rounds of time(large) / time(small), with the two sizes timed back to back in each round.
double scaling_ratio(const std::function<Matrix(const Matrix&)>& fn, const Matrix& small, const Matrix& large,
                     int rounds, int calls, double& small_s, double& large_s) {
  double sink = 0.0;
  auto block = [&](const Matrix& h) {
    const auto t0 = Clock::now();
    for (int i = 0; i < calls; ++i) sink += fn(h)(0, 0);
    return seconds_since(t0) / calls;
  };
  block(small);
  block(large);
  std::vector<double> ratios, smalls, larges;
  for (int r = 0; r < rounds; ++r) {
    smalls.push_back(block(small));
    larges.push_back(block(large));
    ratios.push_back(larges.back() / smalls.back());
  }
  auto median = [](std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
  };
  if (sink == 12345.678) std::cerr << "";
  small_s = median(smalls);
  large_s = median(larges);
  return median(ratios);
}

// 9. TFM scaling against attention.
Outcome criterion_9() {
  Outcome out;
  std::mt19937_64 rng(909);
  const std::size_t d = 64;
  const Matrix h256 = random_matrix(256, d, rng);
  const Matrix h512 = random_matrix(512, d, rng);
  const ButterworthSpec spec;
  auto tfm = [&](const Matrix& h) { return tfm_apply(h, spec); };
  double tfm256 = 0.0, tfm512 = 0.0, att256 = 0.0, att512 = 0.0;
  const double tfm_ratio = scaling_ratio(tfm, h256, h512, 15, 10, tfm256, tfm512);
  const double att_ratio = scaling_ratio(attention_standin, h256, h512, 15, 10, att256, att512);
  out.note("median TFM " + fmt(tfm256 * 1e3) + " / " + fmt(tfm512 * 1e3) + " ms, attention " + fmt(att256 * 1e3) +
           " / " + fmt(att512 * 1e3) + " ms at T = 256 / 512");
  out.check(tfm_ratio < kTfmRatioMax, "TFM time(512)/time(256) = " + fmt(tfm_ratio) + " < " + fmt(kTfmRatioMax));
  out.check(att_ratio >= kAttentionRatioMin,
            "attention time(512)/time(256) = " + fmt(att_ratio) + " >= " + fmt(kAttentionRatioMin));
  return out;
}

const std::map<std::string, std::pair<std::string, std::function<Outcome()>>>& registry() {
  static const std::map<std::string, std::pair<std::string, std::function<Outcome()>>> r = {
      {"1", {"G-LPF polynomial vs spectral oracle", criterion_1}},
      {"2", {"ring graph eigenbasis is the DFT basis", criterion_2}},
      {"3", {"TFM smoothing probe", criterion_3}},
      {"4", {"numerical core and gradient check", criterion_4}},
      {"5", {"Butterworth contract", criterion_5}},
      {"6", {"evaluation protocol", criterion_6}},
      {"6a", {"LastFM filtering statistics", criterion_6a}},
      {"7", {"TFM raises final-layer low-band share", criterion_7}},
      {"8a", {"separable set is learned", criterion_8a}},
      {"8b", {"pipeline beats baseline floors", criterion_8b}},
      {"9", {"TFM scaling vs attention", criterion_9}},
  };
  return r;
}

int run_one(const std::string& id) {
  const auto it = registry().find(id);
  if (it == registry().end()) {
    std::cerr << "unknown criterion '" << id << "'\n";
    return 1;
  }
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = it->second.second();
  } catch (const std::exception& e) {
    o.check(false, std::string("exception: ") + e.what());
  }
  for (const auto& line : o.lines) std::cout << line << "\n";
  const char* tag = o.status == Status::kPass ? "PASS" : o.status == Status::kSkip ? "SKIP" : "FAIL";
  std::cout << "criterion " << id << " [" << it->second.first << "]: " << tag << " (" << fmt(seconds_since(t0))
            << " s)\n";
  return o.status == Status::kPass ? 0 : o.status == Status::kSkip ? 77 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> ids;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) {
      ids.push_back(argv[++i]);
    } else if (a == "--all") {
      for (const auto& [k, v] : registry()) ids.push_back(k);
    } else {
      std::cerr << "usage: specrec_acceptance --criterion ID [--criterion ID ...] | --all\n";
      return 1;
    }
  }
  if (ids.empty()) {
    std::cerr << "usage: specrec_acceptance --criterion ID [--criterion ID ...] | --all\n";
    return 1;
  }
  int worst = 0;
  for (const auto& id : ids) {
    const int rc = run_one(id);
    if (rc == 1 || (rc == 77 && worst == 0)) worst = rc;
  }
  return worst;
}
