// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "specrec/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "specrec/io.hpp"
#include "specrec/parallel.hpp"

namespace specrec {

std::uint64_t candidate_seed(std::uint64_t seed, std::size_t user) { return seed ^ static_cast<std::uint64_t>(user); }

std::string phase_name(Phase phase) { return phase == Phase::kValid ? "valid" : "test"; }

CandidateSet sample_candidates(const SplitDataset& split, std::size_t user, Phase phase, std::size_t n,
                               std::uint64_t seed) {
  const auto touched = split.interacted(user);
  std::vector<std::size_t> pool;
  pool.reserve(split.n_items());
  for (std::size_t i = 0, t = 0; i < split.n_items(); ++i) {
    while (t < touched.size() && touched[t] < i) ++t;
    if (t < touched.size() && touched[t] == i) continue;
    pool.push_back(i);
  }
  if (pool.size() < n) {
    throw InsufficientCandidates("user " + std::to_string(user) + " has " + std::to_string(pool.size()) +
                                 " non-interacted items, " + std::to_string(n) + " required");
  }
  CandidateSet set;
  set.user = user;
  set.truth = split.target(user, phase);
  set.seed = candidate_seed(seed, user);
  std::mt19937_64 rng(set.seed);
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  set.negatives.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n));
  set.items = set.negatives;
  std::uniform_int_distribution<std::size_t> slot(0, n);
  set.truth_index = slot(rng);
  set.items.insert(set.items.begin() + static_cast<std::ptrdiff_t>(set.truth_index), set.truth);
  return set;
}

RankResult rank_metrics(std::span<const double> scores, std::size_t truth_index, std::size_t k) {
  if (truth_index >= scores.size()) throw EvaluationError("truth index outside the candidate list");
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) throw EvaluationError("score of candidate " + std::to_string(i) + " is NaN");
  }
  const double s = scores[truth_index];
  std::size_t rank = 1;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] > s || (scores[i] == s && i < truth_index)) ++rank;
  }
  RankResult r;
  r.rank = rank;
  if (rank <= k) {
    r.recall = 1.0;
    r.ndcg = 1.0 / std::log2(static_cast<double>(rank) + 1.0);
  }
  return r;
}

MetricsReport evaluate(const SplitDataset& split, Phase phase, const Scorer& scorer, const EvalConfig& config,
                       const std::string& label) {
  std::size_t n_users = split.n_users();
  if (config.max_users != 0) n_users = std::min(n_users, config.max_users);
  std::vector<UserMetrics> rows(n_users);
  std::vector<char> ok(n_users, 0);
  parallel_for(n_users, config.workers, [&](std::size_t u) {
    CandidateSet set;
    try {
      set = sample_candidates(split, u, phase, config.n_candidates, config.seed);
    } catch (const InsufficientCandidates&) {
      return;
    }
    const auto scores = scorer(u, phase, set.items);
    if (scores.size() != set.items.size()) throw EvaluationError("scorer returned the wrong number of scores");
    const RankResult r = rank_metrics(scores, set.truth_index, config.k);
    rows[u] = {u, r.rank, r.ndcg, r.recall};
    ok[u] = 1;
  });
  MetricsReport report;
  report.label = label;
  report.phase = phase_name(phase);
  report.k = config.k;
  for (std::size_t u = 0; u < n_users; ++u) {
    if (!ok[u]) {
      ++report.excluded;
      continue;
    }
    report.per_user.push_back(rows[u]);
    report.ndcg += rows[u].ndcg;
    report.recall += rows[u].recall;
  }
  report.users = report.per_user.size();
  if (report.users > 0) {
    report.ndcg /= static_cast<double>(report.users);
    report.recall /= static_cast<double>(report.users);
  }
  return report;
}

nlohmann::json MetricsReport::to_json() const {
  const std::string kk = std::to_string(k);
  return {{"label", label},           {"phase", phase},       {"k", k},
          {"ndcg@" + kk, ndcg},       {"recall@" + kk, recall}, {"users", users},
          {"excluded_users", excluded}, {"config_hash", fingerprint}};
}

std::string MetricsReport::per_user_csv() const {
  std::string out = "user,rank,ndcg,recall\n";
  for (const auto& r : per_user) {
    out += std::to_string(r.user) + "," + std::to_string(r.rank) + "," + format_double(r.ndcg) + "," +
           format_double(r.recall) + "\n";
  }
  return out;
}

Scorer random_scorer(std::uint64_t seed) {
  return [seed](std::size_t user, Phase phase, std::span<const std::size_t> candidates) {
    std::mt19937_64 rng(mix_seed(seed, 2 * user + (phase == Phase::kTest ? 1 : 0)));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> s(candidates.size());
    for (double& v : s) v = unif(rng);
    return s;
  };
}

Scorer popularity_scorer(const SplitDataset& split) {
  auto counts = std::make_shared<std::vector<double>>(split.n_items(), 0.0);
  for (std::size_t u = 0; u < split.n_users(); ++u)
    for (std::size_t i : split.train(u)) (*counts)[i] += 1.0;
  return [counts](std::size_t, Phase, std::span<const std::size_t> candidates) {
    std::vector<double> s;
    s.reserve(candidates.size());
    for (std::size_t c : candidates) s.push_back((*counts)[c]);
    return s;
  };
}

}  // namespace specrec
