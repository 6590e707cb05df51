// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "specrec/dataset.hpp"
#include "specrec/errors.hpp"

using namespace specrec;

namespace {

Interaction ev(std::string u, std::string i, std::int64_t ts) { return {std::move(u), std::move(i), ts, ""}; }

// Removes one offending user or item per step until none is left.
std::set<std::tuple<std::string, std::string, std::int64_t>> brute_force_filter(std::vector<Interaction> events,
                                                                                std::size_t min) {
  for (bool changed = true; changed;) {
    changed = false;
    std::map<std::string, std::size_t> uc, ic;
    for (const auto& e : events) {
      ++uc[e.user];
      ++ic[e.item];
    }
    for (const auto& [u, c] : uc) {
      if (c < min) {
        std::erase_if(events, [&](const Interaction& e) { return e.user == u; });
        changed = true;
        break;
      }
    }
    if (changed) continue;
    for (const auto& [i, c] : ic) {
      if (c < min) {
        std::erase_if(events, [&](const Interaction& e) { return e.item == i; });
        changed = true;
        break;
      }
    }
  }
  std::set<std::tuple<std::string, std::string, std::int64_t>> out;
  for (const auto& e : events) out.insert({e.user, e.item, e.timestamp});
  return out;
}

std::set<std::tuple<std::string, std::string, std::int64_t>> split_events(const SplitDataset& s,
                                                                           const InteractionLog& log) {
  // Reconstruct by matching surviving tokens against the log in canonical order.
  std::set<std::tuple<std::string, std::string, std::int64_t>> out;
  std::set<std::string> users(s.user_tokens().begin(), s.user_tokens().end());
  std::set<std::string> items(s.item_tokens().begin(), s.item_tokens().end());
  for (const auto& e : log.events())
    if (users.count(e.user) && items.count(e.item)) out.insert({e.user, e.item, e.timestamp});
  return out;
}

}  // namespace

TEST_CASE("duplicate rows collapse") {
  const auto log = parse_log("u1\ti1\t10\nu1\ti2\t11\nu1\ti1\t10\n", LogFormat::kTsv);
  CHECK(log.size() == 2);
}

TEST_CASE("missing timestamp column names the line") {
  try {
    parse_log("u1\ti1\t10\nu1\ti2\n", LogFormat::kTsv, "log.tsv");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("log.tsv:2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_log("u1\ti1\tabc\n", LogFormat::kTsv), ParseError);
  CHECK_THROWS_AS(parse_log("u1\ti1\t-5\n", LogFormat::kTsv), ParseError);
  CHECK_THROWS_AS(parse_log("\n\n", LogFormat::kTsv), InputError);
}

TEST_CASE("JSON-lines with optional text") {
  const auto log = parse_log(R"({"user":"a","item":"x","ts":3,"text":"red shoe"}
{"user":7,"item":"y","ts":1}
)",
                             LogFormat::kJsonLines);
  REQUIRE(log.size() == 2);
  CHECK(log.events()[0].user == "7");
  CHECK(log.events()[1].text == "red shoe");
  CHECK_THROWS_AS(parse_log(R"({"user":"a","item":"x"})", LogFormat::kJsonLines), ParseError);
  CHECK_THROWS_AS(parse_log("{not json", LogFormat::kJsonLines), ParseError);
}

TEST_CASE("threshold and leave-one-out arithmetic") {
  std::vector<Interaction> events;
  // Five items each consumed by five users keeps the item side alive.
  for (int u = 0; u < 5; ++u)
    for (int i = 0; i < 5; ++i) events.push_back(ev("u" + std::to_string(u), "i" + std::to_string(i), 100 + i));
  // A user with only four interactions.
  for (int i = 0; i < 4; ++i) events.push_back(ev("short", "i" + std::to_string(i), 200 + i));
  const auto split = build_split(InteractionLog(events), 5, 50);
  CHECK(split.n_users() == 5);
  CHECK(std::find(split.user_tokens().begin(), split.user_tokens().end(), "short") == split.user_tokens().end());
  CHECK(split.train(0).size() == 3);
  CHECK(split.valid_target(0) == 3);
  CHECK(split.test_target(0) == 4);
  CHECK(split.history(0, Phase::kTest).size() == 4);
}

TEST_CASE("two-stage cascade matches the brute-force fixed point") {
  // Users a..e share items p,q,r,s,x; user f only meets x four times with y.
  // Item y has 4 interactions -> removed; f then drops to 4 -> removed; x loses f.
  std::vector<Interaction> events;
  const std::vector<std::string> core = {"p", "q", "r", "s", "x"};
  for (std::string u : {"a", "b", "c", "d", "e"})
    for (std::size_t k = 0; k < core.size(); ++k) events.push_back(ev(u, core[k], static_cast<std::int64_t>(k)));
  for (int k = 0; k < 4; ++k) events.push_back(ev("f", "y", 10 + k));
  events.push_back(ev("f", "x", 20));
  const InteractionLog log(events);
  const auto split = build_split(log, 5, 50);
  CHECK(split.n_users() == 5);
  CHECK(split.n_items() == 5);
  CHECK(split_events(split, log) == brute_force_filter(events, 5));
  CHECK(split.filter_trace().size() == 3);
}

TEST_CASE("fixed point agrees with brute force on random logs and is file-order independent") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    std::uniform_int_distribution<int> user(0, 14), item(0, 11), ts(0, 40);
    std::vector<Interaction> events;
    for (int k = 0; k < 150; ++k)
      events.push_back(ev("u" + std::to_string(user(rng)), "i" + std::to_string(item(rng)), ts(rng)));
    const InteractionLog log(events);
    const auto expected = brute_force_filter(log.events(), 5);
    if (expected.empty()) {
      CHECK_THROWS_AS(build_split(log, 5, 50), DatasetTooSparse);
      continue;
    }
    const auto split = build_split(log, 5, 50);
    CHECK(split_events(split, log) == expected);
    std::vector<std::size_t> user_counts(split.n_users()), item_counts(split.n_items());
    for (const auto& s : split.sequences()) {
      user_counts[s.user] += s.items.size();
      for (auto i : s.items) ++item_counts[i];
    }
    for (auto c : user_counts) CHECK(c >= 5);
    for (auto c : item_counts) CHECK(c >= 5);

    std::shuffle(events.begin(), events.end(), rng);
    const auto again = build_split(InteractionLog(events), 5, 50);
    CHECK(again.to_json() == split.to_json());
  }
}

TEST_CASE("timestamp ties break on item token") {
  std::vector<Interaction> events;
  for (std::string i : {"c", "a", "b"}) events.push_back(ev("u", i, 5));
  const InteractionLog log(events);
  CHECK(log.events()[0].item == "a");
  CHECK(log.events()[2].item == "c");
}

TEST_CASE("everything filtered away reports the iteration trace") {
  try {
    build_split(InteractionLog({ev("u", "i", 1), ev("u", "j", 2)}), 5, 50);
    FAIL("expected DatasetTooSparse");
  } catch (const DatasetTooSparse& e) {
    CHECK(std::string(e.what()).find("1: 1 users") != std::string::npos);
  }
}

TEST_CASE("model input keeps the most recent items") {
  const auto split = SplitDataset::from_sequences({{0, 1, 2, 3, 4, 5, 6}}, 7, 3);
  const auto in = split.model_input(0, Phase::kTest);
  REQUIRE(in.size() == 3);
  CHECK(in[0] == 3);
  CHECK(in[2] == 5);
}

TEST_CASE("split JSON roundtrip") {
  const auto split = SplitDataset::from_sequences({{0, 1, 2, 3}, {2, 1, 0}}, 4, 10);
  const auto back = SplitDataset::from_json(nlohmann::json::parse(split.to_json().dump()));
  CHECK(back.fingerprint() == split.fingerprint());
  CHECK(back.summary_json()["interactions"] == 7);
}

TEST_SUITE("synthesize") {
  TEST_CASE("fixed seed reproduces the log byte for byte") {
    SynthConfig cfg;
    cfg.users = 30;
    cfg.items = 40;
    const auto a = synthesize(cfg);
    const auto b = synthesize(cfg);
    CHECK(log_to_tsv(a.log) == log_to_tsv(b.log));
    cfg.seed = 2;
    CHECK(log_to_tsv(synthesize(cfg).log) != log_to_tsv(a.log));
  }

  TEST_CASE("rho near one with two items gives nearly constant sequences") {
    SynthConfig cfg;
    cfg.users = 50;
    cfg.items = 2;
    cfg.rho = 0.9999;
    cfg.mean_length = 10;
    const auto data = synthesize(cfg);
    std::size_t switches = 0, steps = 0;
    const auto& evs = data.log.events();
    for (std::size_t k = 1; k < evs.size(); ++k) {
      if (evs[k].user != evs[k - 1].user) continue;
      ++steps;
      switches += evs[k].item != evs[k - 1].item;
    }
    CHECK(static_cast<double>(switches) / static_cast<double>(steps) < 0.05);
  }

  TEST_CASE("adjacent pairs carry more affinity than pairs five steps apart") {
    SynthConfig cfg;
    cfg.users = 100;
    cfg.items = 60;
    cfg.rho = 0.5;
    const auto data = synthesize(cfg);
    const auto& evs = data.log.events();
    std::map<std::string, std::vector<std::size_t>> seqs;
    for (const auto& e : evs) seqs[e.user].push_back(std::stoul(e.item.substr(1)));
    double near_sum = 0, far_sum = 0;
    std::size_t near_n = 0, far_n = 0;
    for (const auto& [u, s] : seqs) {
      for (std::size_t t = 0; t + 1 < s.size(); ++t, ++near_n) near_sum += data.affinity(s[t], s[t + 1]);
      for (std::size_t t = 0; t + 5 < s.size(); ++t, ++far_n) far_sum += data.affinity(s[t], s[t + 5]);
    }
    CHECK(near_sum / near_n > far_sum / far_n);
  }

  TEST_CASE("affinity is symmetric with a zero diagonal") {
    SynthConfig cfg;
    cfg.items = 12;
    const auto data = synthesize(cfg);
    for (std::size_t i = 0; i < 12; ++i) {
      CHECK(data.affinity(i, i) == 0.0);
      for (std::size_t j = 0; j < 12; ++j) CHECK(data.affinity(i, j) == doctest::Approx(data.affinity(j, i)));
    }
  }

  TEST_CASE("input validation") {
    SynthConfig cfg;
    cfg.rho = 1.0;
    CHECK_THROWS_AS(synthesize(cfg), InputError);
    cfg.rho = 0.5;
    cfg.users = 0;
    CHECK_THROWS_AS(synthesize(cfg), InputError);
  }
}
