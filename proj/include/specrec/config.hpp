// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "specrec/analysis.hpp"
#include "specrec/dataset.hpp"
#include "specrec/embedding.hpp"
#include "specrec/evaluate.hpp"
#include "specrec/glpf.hpp"
#include "specrec/model.hpp"
#include "specrec/train.hpp"

namespace specrec {

/// The whole pipeline configuration as one JSON document. Every field has a
/// default and is always written back out in full.
class RunConfig {
 public:
  RunConfig();

  static nlohmann::json defaults();
  /// Defaults overlaid with a file; unknown keys are rejected.
  static RunConfig from_file(const std::filesystem::path& path);
  static RunConfig from_json(const nlohmann::json& overrides);

  const nlohmann::json& json() const noexcept { return doc_; }
  /// Sets one dotted path ("tfm.cutoff"); the path must already exist and
  /// the value must keep its JSON type family.
  void set(const std::string& dotted, const nlohmann::json& value);
  const nlohmann::json& at(const std::string& dotted) const;

  /// Hex hash of the canonical dump.
  std::string hash() const;

  std::size_t workers() const;
  SynthConfig synth() const;
  PretrainConfig pretrain() const;
  MlpConfig mlp() const;
  BackboneConfig backbone() const;
  PolyFilterSpec glpf_spec() const;
  bool glpf_enabled() const;
  TrainConfig train() const;
  EvalConfig eval() const;
  AnalysisConfig analysis() const;
  ProbeConfig probe() const;

 private:
  void validate() const;
  nlohmann::json doc_;
};

}  // namespace specrec
