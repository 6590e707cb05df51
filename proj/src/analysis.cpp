// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "specrec/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <random>

#include "specrec/dft.hpp"
#include "specrec/errors.hpp"
#include "specrec/io.hpp"
#include "specrec/parallel.hpp"
#include "specrec/spectral.hpp"

namespace specrec {

Matrix SpectralProfile::shares() const {
  Matrix s = energy;
  for (std::size_t l = 0; l < s.rows(); ++l) {
    double total = 0.0;
    for (double v : s.row(l)) total += v;
    if (total > 0.0)
      for (double& v : s.row(l)) v /= total;
  }
  return s;
}

SpectralProfile& SpectralProfile::operator+=(const SpectralProfile& other) {
  if (energy.size() == 0) {
    energy = other.energy;
  } else {
    if (energy.rows() != other.energy.rows() || energy.cols() != other.energy.cols()) {
      throw InputError("profiles with different layer or band counts cannot be added");
    }
    energy += other.energy;
  }
  users += other.users;
  skipped_short += other.skipped_short;
  skipped_degenerate += other.skipped_degenerate;
  return *this;
}

nlohmann::json SpectralProfile::to_json() const {
  const Matrix sh = shares();
  nlohmann::json e = nlohmann::json::array(), s = nlohmann::json::array();
  for (std::size_t l = 0; l < n_layers(); ++l) {
    e.push_back(std::vector<double>(energy.row(l).begin(), energy.row(l).end()));
    s.push_back(std::vector<double>(sh.row(l).begin(), sh.row(l).end()));
  }
  return {{"format", "specrec-profile-v1"},
          {"config_hash", fingerprint},
          {"layers", n_layers()},
          {"bands", n_bands()},
          {"users", users},
          {"skipped_short", skipped_short},
          {"skipped_degenerate", skipped_degenerate},
          {"energy", e},
          {"share", s}};
}

SpectralProfile SpectralProfile::from_json(const nlohmann::json& j) {
  SpectralProfile p;
  const std::size_t layers = j.at("layers").get<std::size_t>();
  const std::size_t bands = j.at("bands").get<std::size_t>();
  p.energy = Matrix(layers, bands);
  for (std::size_t l = 0; l < layers; ++l)
    for (std::size_t b = 0; b < bands; ++b) p.energy(l, b) = j.at("energy").at(l).at(b).get<double>();
  p.users = j.at("users").get<std::size_t>();
  p.skipped_short = j.value("skipped_short", std::size_t{0});
  p.skipped_degenerate = j.value("skipped_degenerate", std::size_t{0});
  p.fingerprint = j.value("config_hash", "");
  return p;
}

std::string SpectralProfile::to_csv() const {
  const Matrix sh = shares();
  std::string out = "layer,band,energy,share\n";
  for (std::size_t l = 0; l < n_layers(); ++l)
    for (std::size_t b = 0; b < n_bands(); ++b)
      out += std::to_string(l) + "," + std::to_string(b + 1) + "," + format_double(energy(l, b)) + "," +
             format_double(sh(l, b)) + "\n";
  return out;
}

Matrix layer_band_energy(const LocalGraph& graph, std::span<const Matrix> hidden, std::size_t n_bands) {
  const SpectralBasis basis = spectral_basis(graph.laplacian);
  Matrix out(hidden.size(), n_bands);
  for (std::size_t l = 0; l < hidden.size(); ++l) {
    if (hidden[l].rows() != graph.size()) {
      throw InputError("hidden matrix has " + std::to_string(hidden[l].rows()) + " rows, local graph has " +
                       std::to_string(graph.size()) + " nodes");
    }
    const BandEnergy be = band_energy(basis, gft(basis, hidden[l]), n_bands);
    for (std::size_t b = 0; b < n_bands; ++b) out(l, b) = be.energy[b];
  }
  return out;
}

std::vector<std::vector<std::size_t>> analysis_sequences(const SplitDataset& split) {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(split.n_users());
  for (std::size_t u = 0; u < split.n_users(); ++u) {
    const auto h = split.model_input(u, Phase::kTest);
    std::vector<std::size_t> s(h.begin(), h.end());
    s.push_back(split.test_target(u));
    out.push_back(std::move(s));
  }
  return out;
}

SpectralProfile trace_spectral_profile(const RecModel& model, std::span<const std::vector<std::size_t>> sequences,
                                       const CooccurrenceGraph& graph, const AnalysisConfig& config) {
  if (config.bands == 0) throw InputError("analysis: band count must be positive");
  if (graph.n_items() != model.n_items()) throw InputError("analysis: graph and model item counts differ");
  std::vector<std::size_t> chosen(sequences.size());
  std::iota(chosen.begin(), chosen.end(), 0);
  if (config.max_users != 0 && config.max_users < chosen.size()) {
    std::mt19937_64 rng(config.sample_seed);
    std::shuffle(chosen.begin(), chosen.end(), rng);
    chosen.resize(config.max_users);
    std::sort(chosen.begin(), chosen.end());
  }
  const Matrix tokens = model.token_table();
  const std::size_t layers = model.backbone().config().layers + 1;
  enum Status : char { kUsed, kShort, kDegenerate };
  std::vector<Matrix> per_user(chosen.size());
  std::vector<char> status(chosen.size(), kUsed);
  parallel_for(chosen.size(), config.workers, [&](std::size_t i) {
    const auto& seq = sequences[chosen[i]];
    if (seq.size() < 3 || seq.size() - 1 < config.bands) {
      status[i] = kShort;
      return;
    }
    const std::span<const std::size_t> all(seq);
    const LocalGraph lg = local_subgraph(graph, all.subspan(1));
    if (lg.degenerate()) {
      status[i] = kDegenerate;
      return;
    }
    const auto fr = model.forward(tokens, all.first(seq.size() - 1), true);
    per_user[i] = layer_band_energy(lg, fr.trace.hidden, config.bands);
  });
  SpectralProfile p;
  p.energy = Matrix(layers, config.bands);
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    if (status[i] == kShort) {
      ++p.skipped_short;
    } else if (status[i] == kDegenerate) {
      ++p.skipped_degenerate;
    } else {
      p.energy += per_user[i];
      ++p.users;
    }
  }
  return p;
}

std::vector<BandAttenuation> attenuation_metric(const SpectralProfile& profile) {
  if (profile.n_layers() < 2) throw InputError("attenuation needs at least two layers");
  const Matrix sh = profile.shares();
  const std::size_t n = sh.rows();
  const double xbar = static_cast<double>(n - 1) / 2.0;
  double sxx = 0.0;
  for (std::size_t l = 0; l < n; ++l) sxx += (static_cast<double>(l) - xbar) * (static_cast<double>(l) - xbar);
  std::vector<BandAttenuation> out;
  for (std::size_t b = 0; b < sh.cols(); ++b) {
    BandAttenuation a;
    a.band = b + 1;
    if (sh(0, b) != 0.0) a.ratio = sh(n - 1, b) / sh(0, b);
    double ybar = 0.0;
    for (std::size_t l = 0; l < n; ++l) ybar += sh(l, b);
    ybar /= static_cast<double>(n);
    double sxy = 0.0;
    for (std::size_t l = 0; l < n; ++l) sxy += (static_cast<double>(l) - xbar) * (sh(l, b) - ybar);
    a.slope = sxy / sxx;
    out.push_back(a);
  }
  return out;
}

nlohmann::json attenuation_json(std::span<const BandAttenuation> rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"band", r.band}, {"ratio", r.ratio ? nlohmann::json(*r.ratio) : nlohmann::json()}, {"slope", r.slope}});
  }
  return out;
}

Matrix probe_laplacian(GraphFamily family, std::size_t t, double rho, LaplacianKind kind) {
  Matrix w(t, t);
  if (family == GraphFamily::kRing) {
    if (t < 3) throw InputError("ring family needs T >= 3");
    for (std::size_t i = 0; i < t; ++i) w(i, (i + 1) % t) = w((i + 1) % t, i) = 1.0;
  } else {
    if (!(rho > 0.0 && rho < 1.0)) throw InputError("locality family needs rho in (0, 1)");
    for (std::size_t i = 0; i < t; ++i)
      for (std::size_t j = 0; j < t; ++j)
        if (i != j) w(i, j) = std::pow(rho, std::abs(static_cast<double>(i) - static_cast<double>(j)));
  }
  return kind == LaplacianKind::kNormalized ? normalized_laplacian(w) : combinatorial_laplacian(w);
}

Matrix dense_dft_filter(const Matrix& h, std::span<const double> gains) {
  const std::size_t t = h.rows();
  if (gains.size() != t) throw InputError("dense filter: one gain per row required");
  // M = F^-1 diag(g) F, real because the gains are symmetric.
  Matrix m(t, t);
  for (std::size_t a = 0; a < t; ++a) {
    for (std::size_t b = 0; b < t; ++b) {
      std::complex<double> s = 0.0;
      for (std::size_t k = 0; k < t; ++k) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>((k * ((a + t - b) % t)) % t) /
                             static_cast<double>(t);
        s += gains[k] * std::polar(1.0, angle);
      }
      m(a, b) = s.real() / static_cast<double>(t);
    }
  }
  return matmul(m, h);
}

namespace {

struct ProbeTotals {
  std::size_t rayleigh = 0;
  std::size_t quadratic = 0;
  double s_before = 0.0, s_after = 0.0, r_before = 0.0, r_after = 0.0;
};

bool increased(double after, double before) { return after > before + 1e-12 * std::max(1.0, std::abs(before)); }

ProbeTotals run_probe(const ProbeConfig& c, std::uint64_t seed, bool dense) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> len(c.t_min, c.t_max);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ProbeTotals tot;
  for (std::size_t trial = 0; trial < c.trials; ++trial) {
    const std::size_t t = len(rng);
    Matrix h(t, c.dim);
    for (double& v : h.data()) v = gauss(rng);
    const Matrix l = probe_laplacian(c.family, t, c.rho, c.laplacian);
    Matrix out = h;
    if (c.filter_enabled) out = dense ? dense_dft_filter(h, butterworth_gains(c.filter, t)) : tfm_apply(h, c.filter);
    const double sb = smoothness(l, h), sa = smoothness(l, out);
    const double rb = rayleigh_quotient(l, h), ra = rayleigh_quotient(l, out);
    tot.s_before += sb;
    tot.s_after += sa;
    tot.r_before += rb;
    tot.r_after += ra;
    if (increased(sa, sb)) ++tot.quadratic;
    if (increased(ra, rb)) ++tot.rayleigh;
  }
  return tot;
}

}  // namespace

SmoothingProbeReport smoothing_probe(const ProbeConfig& config) {
  if (config.trials == 0 || config.dim == 0) throw InputError("probe: trials and dim must be positive");
  if (config.t_min < 3 || config.t_max < config.t_min) throw InputError("probe: need 3 <= t_min <= t_max");
  if (config.filter_enabled) config.filter.validate();
  SmoothingProbeReport r;
  r.config = config;
  r.trials = config.trials;
  const ProbeTotals main = run_probe(config, config.seed, false);
  const double n = static_cast<double>(config.trials);
  r.rayleigh_violations = main.rayleigh;
  r.quadratic_violations = main.quadratic;
  r.mean_smoothness_before = main.s_before / n;
  r.mean_smoothness_after = main.s_after / n;
  r.mean_rayleigh_before = main.r_before / n;
  r.mean_rayleigh_after = main.r_after / n;
  const ProbeTotals pilot = run_probe(config, mix_seed(config.seed, 0x9110), true);
  r.pilot_trials = config.trials;
  r.pilot_rayleigh_violations = pilot.rayleigh;
  r.threshold = (static_cast<double>(pilot.rayleigh) + 3.0) / n;
  return r;
}

nlohmann::json SmoothingProbeReport::to_json() const {
  const auto& c = config;
  return {{"family", c.family == GraphFamily::kRing ? "ring" : "locality"},
          {"rho", c.rho},
          {"t_min", c.t_min},
          {"t_max", c.t_max},
          {"dim", c.dim},
          {"laplacian", c.laplacian == LaplacianKind::kNormalized ? "normalized" : "combinatorial"},
          {"filter", {{"enabled", c.filter_enabled}, {"cutoff", c.filter.cutoff}, {"order", c.filter.order}}},
          {"seed", c.seed},
          {"trials", trials},
          {"rayleigh_violations", rayleigh_violations},
          {"quadratic_violations", quadratic_violations},
          {"rayleigh_violation_rate", rayleigh_rate()},
          {"mean_smoothness_before", mean_smoothness_before},
          {"mean_smoothness_after", mean_smoothness_after},
          {"mean_rayleigh_before", mean_rayleigh_before},
          {"mean_rayleigh_after", mean_rayleigh_after},
          {"pilot", {{"trials", pilot_trials}, {"rayleigh_violations", pilot_rayleigh_violations}}},
          {"threshold", threshold}};
}

GraphFamily parse_graph_family(const std::string& s) {
  if (s == "ring") return GraphFamily::kRing;
  if (s == "locality") return GraphFamily::kLocality;
  throw InputError("unknown graph family '" + s + "' (ring|locality)");
}

LaplacianKind parse_laplacian_kind(const std::string& s) {
  if (s == "combinatorial") return LaplacianKind::kCombinatorial;
  if (s == "normalized") return LaplacianKind::kNormalized;
  throw InputError("unknown Laplacian kind '" + s + "' (combinatorial|normalized)");
}

void emit_text(const std::filesystem::path& path, const std::string& text) {
  try {
    write_text_file(path, text);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw InputError("cannot write " + path.string() + ": " + e.what());
  }
}

}  // namespace specrec
