// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "specrec/graph.hpp"
#include "specrec/matrix.hpp"
#include "specrec/model.hpp"
#include "specrec/tfm.hpp"

namespace specrec {

/// Band energy per (layer, band), summed over users.
struct SpectralProfile {
  Matrix energy;  // (layers + 1) x bands, raw
  std::size_t users = 0;
  std::size_t skipped_short = 0;
  std::size_t skipped_degenerate = 0;
  std::string fingerprint;

  std::size_t n_layers() const noexcept { return energy.rows(); }
  std::size_t n_bands() const noexcept { return energy.cols(); }
  /// Each layer's row divided by its total (rows of zeros stay zero).
  Matrix shares() const;
  /// Raw energies and counters add.
  SpectralProfile& operator+=(const SpectralProfile& other);

  nlohmann::json to_json() const;
  static SpectralProfile from_json(const nlohmann::json& j);
  /// layer,band,energy,share with 1-based bands.
  std::string to_csv() const;
};

/// Band energies of each hidden matrix on one local graph. Every hidden
/// matrix must have one row per graph node.
Matrix layer_band_energy(const LocalGraph& graph, std::span<const Matrix> hidden, std::size_t n_bands);

struct AnalysisConfig {
  std::size_t bands = 4;
  std::size_t workers = 1;
  std::size_t max_users = 0;  // 0 = every sequence; otherwise a seeded sample
  std::uint64_t sample_seed = 1;
};

/// For each sequence v_1..v_T: forward over v_1..v_{T-1} with capture, local
/// graph over the targets v_2..v_T, band energy per layer, summed.
SpectralProfile trace_spectral_profile(const RecModel& model, std::span<const std::vector<std::size_t>> sequences,
                                       const CooccurrenceGraph& graph, const AnalysisConfig& config);

/// Full per-user sequences (history plus test item), each cut to the most
/// recent max_seq_len + 1 items.
std::vector<std::vector<std::size_t>> analysis_sequences(const SplitDataset& split);

struct BandAttenuation {
  std::size_t band = 0;  // 1-based
  std::optional<double> ratio;  // final / initial share; empty when the initial share is 0
  double slope = 0.0;           // least-squares share change per layer
};

std::vector<BandAttenuation> attenuation_metric(const SpectralProfile& profile);
nlohmann::json attenuation_json(std::span<const BandAttenuation> rows);

enum class GraphFamily { kRing, kLocality };
enum class LaplacianKind { kCombinatorial, kNormalized };

struct ProbeConfig {
  GraphFamily family = GraphFamily::kLocality;
  double rho = 0.5;
  std::size_t t_min = 8;
  std::size_t t_max = 64;
  std::size_t dim = 4;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  ButterworthSpec filter;
  bool filter_enabled = true;
  LaplacianKind laplacian = LaplacianKind::kCombinatorial;
};

struct SmoothingProbeReport {
  ProbeConfig config;
  std::size_t trials = 0;
  std::size_t rayleigh_violations = 0;
  std::size_t quadratic_violations = 0;
  double mean_smoothness_before = 0.0;
  double mean_smoothness_after = 0.0;
  double mean_rayleigh_before = 0.0;
  double mean_rayleigh_after = 0.0;
  // Pilot oracle: dense DFT-matrix filtering on independent draws.
  std::size_t pilot_trials = 0;
  std::size_t pilot_rayleigh_violations = 0;
  double threshold = 0.0;  // allowed Rayleigh violation rate

  double rayleigh_rate() const { return trials ? static_cast<double>(rayleigh_violations) / trials : 0.0; }
  nlohmann::json to_json() const;
};

/// Graph Laplacian over T sequence positions: unit cycle, or w_ij = rho^|i-j|.
Matrix probe_laplacian(GraphFamily family, std::size_t t, double rho, LaplacianKind kind);

/// Random signals on random-length graphs of the family, filtered by TFM;
/// counts strict increases of the quadratic form and of the Rayleigh quotient.
SmoothingProbeReport smoothing_probe(const ProbeConfig& config);

/// Filters with an explicit complex DFT matrix instead of the FFT path.
Matrix dense_dft_filter(const Matrix& h, std::span<const double> gains);

GraphFamily parse_graph_family(const std::string& s);
LaplacianKind parse_laplacian_kind(const std::string& s);

/// Writes text atomically; failures name the path.
void emit_text(const std::filesystem::path& path, const std::string& text);

}  // namespace specrec
