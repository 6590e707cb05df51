// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "specrec/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "specrec/errors.hpp"
#include "specrec/io.hpp"

namespace specrec {

InteractionLog::InteractionLog(std::vector<Interaction> events) : events_(std::move(events)) {
  std::sort(events_.begin(), events_.end(), [](const Interaction& a, const Interaction& b) {
    if (a.user != b.user) return a.user < b.user;
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    if (a.item != b.item) return a.item < b.item;
    return a.text > b.text;  // rows carrying text win the dedup
  });
  events_.erase(std::unique(events_.begin(), events_.end(),
                            [](const Interaction& a, const Interaction& b) {
                              return a.user == b.user && a.item == b.item && a.timestamp == b.timestamp;
                            }),
                events_.end());
}

LogFormat parse_log_format(const std::string& name) {
  if (name == "tsv") return LogFormat::kTsv;
  if (name == "jsonl" || name == "jsonlines") return LogFormat::kJsonLines;
  throw InputError("unknown log format '" + name + "' (expected tsv or jsonlines)");
}

namespace {

std::int64_t parse_timestamp(std::string_view field, const std::string& origin, std::size_t line) {
  std::int64_t ts = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), ts);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(origin, line, "timestamp '" + std::string(field) + "' is not an integer");
  }
  if (ts < 0) throw ParseError(origin, line, "negative timestamp");
  return ts;
}

std::string json_token(const nlohmann::json& v, const char* key, const std::string& origin, std::size_t line) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  throw ParseError(origin, line, std::string("field '") + key + "' must be a string or integer");
}

}  // namespace

InteractionLog parse_log(const std::string& content, LogFormat format, const std::string& origin) {
  std::vector<Interaction> events;
  std::istringstream in(content);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Interaction ev;
    if (format == LogFormat::kTsv) {
      std::vector<std::string_view> fields;
      std::string_view rest(line);
      for (;;) {
        const auto tab = rest.find('\t');
        fields.push_back(rest.substr(0, tab));
        if (tab == std::string_view::npos) break;
        rest.remove_prefix(tab + 1);
      }
      if (fields.size() < 3) {
        throw ParseError(origin, lineno, "expected user, item, timestamp columns, found " + std::to_string(fields.size()));
      }
      if (fields[0].empty() || fields[1].empty()) throw ParseError(origin, lineno, "empty user or item token");
      ev.user = std::string(fields[0]);
      ev.item = std::string(fields[1]);
      ev.timestamp = parse_timestamp(fields[2], origin, lineno);
      if (fields.size() >= 4) ev.text = std::string(fields[3]);
    } else {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(origin, lineno, std::string("invalid JSON: ") + e.what());
      }
      if (!j.is_object()) throw ParseError(origin, lineno, "expected a JSON object");
      for (const char* key : {"user", "item", "ts"}) {
        if (!j.contains(key)) throw ParseError(origin, lineno, std::string("missing key '") + key + "'");
      }
      ev.user = json_token(j["user"], "user", origin, lineno);
      ev.item = json_token(j["item"], "item", origin, lineno);
      if (!j["ts"].is_number_integer()) throw ParseError(origin, lineno, "'ts' must be an integer");
      ev.timestamp = j["ts"].get<std::int64_t>();
      if (ev.timestamp < 0) throw ParseError(origin, lineno, "negative timestamp");
      if (j.contains("text") && j["text"].is_string()) ev.text = j["text"].get<std::string>();
    }
    events.push_back(std::move(ev));
  }
  if (events.empty()) throw InputError(origin + ": interaction log is empty");
  return InteractionLog(std::move(events));
}

InteractionLog ingest(const std::filesystem::path& path, LogFormat format) {
  return parse_log(read_text_file(path), format, path.string());
}

std::string log_to_tsv(const InteractionLog& log) {
  std::string out;
  for (const auto& e : log.events()) {
    out += e.user;
    out += '\t';
    out += e.item;
    out += '\t';
    out += std::to_string(e.timestamp);
    if (!e.text.empty()) {
      out += '\t';
      out += e.text;
    }
    out += '\n';
  }
  return out;
}

void write_log_tsv(const InteractionLog& log, const std::filesystem::path& path) {
  write_text_file(path, log_to_tsv(log));
}

// ---------------------------------------------------------------------------

std::span<const std::size_t> SplitDataset::train(std::size_t user) const {
  const auto& s = sequences_.at(user).items;
  return {s.data(), s.size() - 2};
}

std::size_t SplitDataset::valid_target(std::size_t user) const {
  const auto& s = sequences_.at(user).items;
  return s[s.size() - 2];
}

std::size_t SplitDataset::test_target(std::size_t user) const { return sequences_.at(user).items.back(); }

std::span<const std::size_t> SplitDataset::history(std::size_t user, Phase phase) const {
  const auto& s = sequences_.at(user).items;
  return {s.data(), s.size() - (phase == Phase::kValid ? 2 : 1)};
}

std::span<const std::size_t> SplitDataset::model_input(std::size_t user, Phase phase) const {
  auto h = history(user, phase);
  if (max_seq_len_ > 0 && h.size() > max_seq_len_) h = h.subspan(h.size() - max_seq_len_);
  return h;
}

std::size_t SplitDataset::target(std::size_t user, Phase phase) const {
  return phase == Phase::kValid ? valid_target(user) : test_target(user);
}

std::vector<std::size_t> SplitDataset::interacted(std::size_t user) const {
  std::vector<std::size_t> items = sequences_.at(user).items;
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  return items;
}

DatasetStats SplitDataset::stats() const {
  DatasetStats s;
  s.users = n_users();
  s.items = n_items();
  for (const auto& seq : sequences_) s.interactions += seq.items.size();
  s.average_length = s.users ? static_cast<double>(s.interactions) / static_cast<double>(s.users) : 0.0;
  return s;
}

nlohmann::json SplitDataset::summary_json() const {
  const auto s = stats();
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& t : trace_) {
    trace.push_back({{"iteration", t.iteration}, {"users", t.users}, {"items", t.items}, {"interactions", t.interactions}});
  }
  return {{"users", s.users},
          {"items", s.items},
          {"interactions", s.interactions},
          {"average_length", std::round(s.average_length * 100.0) / 100.0},
          {"min_interactions", min_interactions_},
          {"max_seq_len", max_seq_len_},
          {"filter_trace", trace},
          {"fingerprint", fingerprint()}};
}

nlohmann::json SplitDataset::to_json() const {
  nlohmann::json seqs = nlohmann::json::array();
  for (const auto& s : sequences_) seqs.push_back(s.items);
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& t : trace_) trace.push_back({t.iteration, t.users, t.items, t.interactions});
  return {{"format", "specrec-split-v1"},
          {"min_interactions", min_interactions_},
          {"max_seq_len", max_seq_len_},
          {"users", user_tokens_},
          {"items", item_tokens_},
          {"texts", item_texts_},
          {"sequences", seqs},
          {"trace", trace}};
}

SplitDataset SplitDataset::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "specrec-split-v1") throw InputError("split: unsupported format");
    SplitDataset s;
    s.min_interactions_ = j.at("min_interactions").get<std::size_t>();
    s.max_seq_len_ = j.at("max_seq_len").get<std::size_t>();
    s.user_tokens_ = j.at("users").get<std::vector<std::string>>();
    s.item_tokens_ = j.at("items").get<std::vector<std::string>>();
    s.item_texts_ = j.at("texts").get<std::vector<std::string>>();
    const auto seqs = j.at("sequences").get<std::vector<std::vector<std::size_t>>>();
    if (seqs.size() != s.user_tokens_.size() || s.item_texts_.size() != s.item_tokens_.size()) {
      throw InputError("split: inconsistent table sizes");
    }
    for (std::size_t u = 0; u < seqs.size(); ++u) {
      if (seqs[u].size() < 3) throw InputError("split: sequence shorter than 3 for user " + std::to_string(u));
      for (std::size_t i : seqs[u])
        if (i >= s.item_tokens_.size()) throw InputError("split: item index out of range");
      s.sequences_.push_back({u, seqs[u]});
    }
    for (const auto& t : j.at("trace")) s.trace_.push_back({t[0], t[1], t[2], t[3]});
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("split: malformed JSON: ") + e.what());
  }
}

std::string SplitDataset::fingerprint() const { return hex64(fnv1a64(to_json().dump())); }

SplitDataset SplitDataset::from_sequences(std::vector<std::vector<std::size_t>> sequences, std::size_t n_items,
                                          std::size_t max_seq_len) {
  SplitDataset s;
  s.max_seq_len_ = max_seq_len;
  s.min_interactions_ = 3;
  const int width = static_cast<int>(std::to_string(std::max<std::size_t>(n_items, sequences.size())).size());
  auto token = [width](char prefix, std::size_t i) {
    std::string digits = std::to_string(i);
    return std::string(1, prefix) + std::string(width - digits.size(), '0') + digits;
  };
  for (std::size_t i = 0; i < n_items; ++i) s.item_tokens_.push_back(token('i', i));
  s.item_texts_.assign(n_items, "");
  for (std::size_t u = 0; u < sequences.size(); ++u) {
    if (sequences[u].size() < 3) throw InputError("from_sequences: every sequence needs at least 3 items");
    for (std::size_t i : sequences[u])
      if (i >= n_items) throw InputError("from_sequences: item index out of range");
    s.user_tokens_.push_back(token('u', u));
    s.sequences_.push_back({u, std::move(sequences[u])});
  }
  return s;
}

SplitDataset build_split(const InteractionLog& log, std::size_t min_interactions, std::size_t max_seq_len) {
  if (log.empty()) throw InputError("build_split: empty interaction log");
  if (min_interactions < 3) throw InputError("build_split: min_interactions must be at least 3 for leave-one-out");

  std::vector<const Interaction*> alive;
  alive.reserve(log.size());
  for (const auto& e : log.events()) alive.push_back(&e);

  SplitDataset split;
  split.min_interactions_ = min_interactions;
  split.max_seq_len_ = max_seq_len;
  std::unordered_map<std::string_view, std::size_t> user_count;
  std::unordered_map<std::string_view, std::size_t> item_count;
  for (std::size_t iteration = 1;; ++iteration) {
    user_count.clear();
    item_count.clear();
    for (const auto* e : alive) {
      ++user_count[e->user];
      ++item_count[e->item];
    }
    split.trace_.push_back({iteration, user_count.size(), item_count.size(), alive.size()});
    const auto before = alive.size();
    std::erase_if(alive, [&](const Interaction* e) {
      return user_count[e->user] < min_interactions || item_count[e->item] < min_interactions;
    });
    if (alive.size() == before) break;
    if (alive.empty()) {
      std::string trace;
      for (const auto& t : split.trace_) {
        trace += " [" + std::to_string(t.iteration) + ": " + std::to_string(t.users) + " users, " +
                 std::to_string(t.items) + " items, " + std::to_string(t.interactions) + " events]";
      }
      throw DatasetTooSparse("build_split: no interactions survive min_interactions=" +
                             std::to_string(min_interactions) + ";" + trace);
    }
  }

  std::set<std::string> users;
  std::map<std::string, std::string> items;  // token -> first non-empty text
  for (const auto* e : alive) {
    users.insert(e->user);
    auto [it, inserted] = items.emplace(e->item, e->text);
    if (!inserted && it->second.empty()) it->second = e->text;
  }
  std::unordered_map<std::string, std::size_t> item_index;
  for (const auto& [token, text] : items) {
    item_index.emplace(token, split.item_tokens_.size());
    split.item_tokens_.push_back(token);
    split.item_texts_.push_back(text);
  }
  split.user_tokens_.assign(users.begin(), users.end());
  // alive is still in canonical (user, timestamp, item) order.
  std::size_t u = 0;
  for (std::size_t i = 0; i < alive.size();) {
    UserSequence seq{u, {}};
    const std::string& token = alive[i]->user;
    for (; i < alive.size() && alive[i]->user == token; ++i) seq.items.push_back(item_index.at(alive[i]->item));
    split.sequences_.push_back(std::move(seq));
    ++u;
  }
  return split;
}

void save_split(const SplitDataset& split, const std::filesystem::path& path) {
  write_text_file(path, split.to_json().dump() + "\n");
}

SplitDataset load_split(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return SplitDataset::from_json(j);
}

// ---------------------------------------------------------------------------

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InputError("normal_quantile: p must lie in (0, 1)");
  double lo = -40.0;
  double hi = 40.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

SyntheticData synthesize(const SynthConfig& config) {
  if (!(config.rho > 0.0 && config.rho < 1.0)) throw InputError("synthesize: rho must lie in (0, 1)");
  if (config.users == 0 || config.items == 0) throw InputError("synthesize: users and items must be positive");
  if (!(config.mean_length > 0.0)) throw InputError("synthesize: mean length must be positive");

  const std::size_t n = config.items;
  const double rho = config.rho;
  const double innovation = std::sqrt(1.0 - rho * rho);
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::poisson_distribution<int> extra(std::max(config.mean_length - 5.0, 1e-9));

  const int item_width = static_cast<int>(std::to_string(n - 1).size());
  const int user_width = static_cast<int>(std::to_string(config.users - 1).size());
  auto pad = [](std::size_t i, int width) {
    std::string d = std::to_string(i);
    return std::string(static_cast<std::size_t>(width) - d.size(), '0') + d;
  };
  const std::size_t coarse = std::max<std::size_t>(1, std::min<std::size_t>(16, n / 4));
  auto item_text = [&](std::size_t i) {
    return "genre" + std::to_string(i * coarse / n) + " style" + std::to_string(i * coarse * 4 / n) + " item" +
           std::to_string(i);
  };

  std::vector<Interaction> events;
  for (std::size_t u = 0; u < config.users; ++u) {
    const std::size_t length = 5 + static_cast<std::size_t>(config.mean_length > 5.0 ? extra(rng) : 0);
    double z = gauss(rng);
    for (std::size_t t = 0; t < length; ++t) {
      if (t > 0) z = rho * z + innovation * gauss(rng);
      const auto bucket = std::min(n - 1, static_cast<std::size_t>(normal_cdf(z) * static_cast<double>(n)));
      Interaction ev;
      ev.user = "u" + pad(u, user_width);
      ev.item = "i" + pad(bucket, item_width);
      ev.timestamp = 1'000'000'000LL + static_cast<std::int64_t>(u) * 1'000'000LL + static_cast<std::int64_t>(t) * 60;
      if (config.with_text) ev.text = item_text(bucket);
      events.push_back(std::move(ev));
    }
  }

  Matrix affinity(n, n);
  std::vector<double> mid(n);
  for (std::size_t i = 0; i < n; ++i) mid[i] = normal_quantile((static_cast<double>(i) + 0.5) / static_cast<double>(n));
  const double denom = 2.0 * (1.0 - rho * rho);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double a = mid[i];
      const double b = mid[j];
      affinity(i, j) = std::exp(-(rho * rho * (a * a + b * b) - 2.0 * rho * a * b) / denom) / innovation;
    }
  }
  return {InteractionLog(std::move(events)), std::move(affinity)};
}

}  // namespace specrec

namespace specrec {

InteractionLog synthesize_successor(std::size_t users, std::size_t items, std::size_t length, std::uint64_t seed) {
  if (users == 0 || items < 2 || length == 0) throw InputError("synthesize_successor: need users, length >= 1, items >= 2");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> start(0, items - 1);
  const int item_width = static_cast<int>(std::to_string(items - 1).size());
  const int user_width = static_cast<int>(std::to_string(users - 1).size());
  auto pad = [](std::size_t i, int width) {
    std::string d = std::to_string(i);
    return std::string(static_cast<std::size_t>(width) - d.size(), '0') + d;
  };
  std::vector<Interaction> events;
  for (std::size_t u = 0; u < users; ++u) {
    const std::size_t s = start(rng);
    for (std::size_t t = 0; t < length; ++t) {
      Interaction ev;
      ev.user = "u" + pad(u, user_width);
      ev.item = "i" + pad((s + t) % items, item_width);
      ev.timestamp = 1'000'000'000LL + static_cast<std::int64_t>(u) * 1'000'000LL + static_cast<std::int64_t>(t) * 60;
      events.push_back(std::move(ev));
    }
  }
  return InteractionLog(std::move(events));
}

}  // namespace specrec
