// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "specrec/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>

#include "specrec/errors.hpp"
#include "specrec/io.hpp"

namespace specrec {

namespace {

constexpr const char* kFormat = "specrec-embeddings-v1";

double sigmoid(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

// -log sigmoid(x), stable for large |x|.
double neg_log_sigmoid(double x) { return x >= 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x)); }

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c >= 0x80) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace

std::string EmbeddingTable::content_hash() const { return hex64(fnv1a64(rows.data())); }

nlohmann::json EmbeddingTable::header() const {
  double lo = 0.0, hi = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < n_items(); ++i) {
    const double n = std::sqrt(dot(rows.row(i), rows.row(i)));
    lo = i == 0 ? n : std::min(lo, n);
    hi = std::max(hi, n);
    mean += n;
  }
  if (n_items() > 0) mean /= static_cast<double>(n_items());
  return {{"format", kFormat},
          {"n_items", n_items()},
          {"dim", dim()},
          {"provenance", provenance},
          {"norms", {{"min", lo}, {"max", hi}, {"mean", mean}}},
          {"content_hash", content_hash()},
          {"meta", meta}};
}

void write_embeddings(const EmbeddingTable& table, std::ostream& out) {
  out << table.header().dump() << '\n';
  write_f64_le(out, table.rows.data());
}

EmbeddingTable read_embeddings(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(origin, 1, "missing embedding header");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(origin, 1, std::string("bad embedding header: ") + e.what());
  }
  if (!h.is_object() || h.value("format", "") != kFormat) throw ParseError(origin, 1, "not an embedding table");
  EmbeddingTable t;
  const std::size_t n = h.at("n_items").get<std::size_t>();
  const std::size_t d = h.at("dim").get<std::size_t>();
  t.rows = Matrix(n, d);
  t.provenance = h.at("provenance").get<std::string>();
  t.meta = h.value("meta", nlohmann::json::object());
  read_f64_le(in, t.rows.data(), origin);
  if (!t.rows.all_finite()) throw InputError(origin + ": embedding table holds non-finite values");
  if (h.contains("content_hash") && h["content_hash"].get<std::string>() != t.content_hash()) {
    throw InputError(origin + ": embedding content hash mismatch");
  }
  return t;
}

void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path) {
  AtomicFile f(path, true);
  write_embeddings(table, f.stream());
  f.commit();
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, std::size_t expected_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  EmbeddingTable t = read_embeddings(in, path.string());
  if (expected_dim != 0 && t.dim() != expected_dim) {
    throw InputError(path.string() + ": embedding dim " + std::to_string(t.dim()) + ", expected " +
                     std::to_string(expected_dim));
  }
  return t;
}

EmbeddingTable load_external(const std::filesystem::path& path, const SplitDataset& split, std::size_t expected_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  if (in.peek() == '{') {
    EmbeddingTable t = read_embeddings(in, path.string());
    if (t.n_items() != split.n_items()) throw InputError(path.string() + ": item count does not match the split");
    if (t.dim() != expected_dim) {
      throw InputError(path.string() + ": embedding dim " + std::to_string(t.dim()) + ", expected " +
                       std::to_string(expected_dim));
    }
    t.provenance = "external";
    return t;
  }
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < split.n_items(); ++i) index.emplace(split.item_tokens()[i], i);
  EmbeddingTable t;
  t.provenance = "external";
  t.meta = {{"source", path.filename().string()}};
  t.rows = Matrix(split.n_items(), expected_dim);
  std::vector<char> seen(split.n_items(), 0);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(path.string(), lineno, "expected item<TAB>vector");
    const auto it = index.find(line.substr(0, tab));
    if (it == index.end()) continue;
    std::istringstream vs(line.substr(tab + 1));
    std::vector<double> v;
    double x;
    while (vs >> x) v.push_back(x);
    if (!vs.eof()) throw ParseError(path.string(), lineno, "non-numeric vector entry");
    if (v.size() != expected_dim) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": vector has " + std::to_string(v.size()) +
                       " entries, expected " + std::to_string(expected_dim));
    }
    std::copy(v.begin(), v.end(), t.rows.row(it->second).begin());
    seen[it->second] = 1;
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) throw InputError(path.string() + ": no vector for item " + split.item_tokens()[i]);
  }
  if (!t.rows.all_finite()) throw InputError(path.string() + ": non-finite vector entries");
  return t;
}

PretrainResult pretrain_id_embeddings(const SplitDataset& split, const PretrainConfig& config) {
  if (config.dim == 0 || config.window == 0) throw InputError("pretrain: dim and window must be positive");
  if (!(config.lr > 0.0)) throw InputError("pretrain: lr must be positive");
  const std::size_t n = split.n_items(), d = config.dim;
  std::size_t total_train = 0;
  std::vector<double> freq(n, 0.0);
  for (std::size_t u = 0; u < split.n_users(); ++u) {
    for (std::size_t i : split.train(u)) freq[i] += 1.0;
    total_train += split.train(u).size();
  }
  if (total_train == 0) throw InputError("pretrain: no training interactions");

  std::vector<double> cdf(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) cdf[i] = acc += std::pow(freq[i], 0.75);
  for (double& c : cdf) c /= acc;

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix in(n, d), out(n, d);
  for (double& v : in.data()) v = (unif(rng) - 0.5) / static_cast<double>(d);

  auto draw = [&]() {
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), unif(rng));
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), n - 1);
  };

  std::size_t pairs_per_epoch = 0;
  for (std::size_t u = 0; u < split.n_users(); ++u) {
    const auto s = split.train(u);
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = i > config.window ? i - config.window : 0; j < std::min(s.size(), i + config.window + 1); ++j)
        if (j != i && s[j] != s[i]) ++pairs_per_epoch;
  }
  const double total_steps = static_cast<double>(std::max<std::size_t>(1, pairs_per_epoch * config.epochs));

  PretrainResult result;
  std::vector<std::size_t> order(split.n_users());
  std::vector<double> grad(d);
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t u = 0; u < order.size(); ++u) order[u] = u;
    std::shuffle(order.begin(), order.end(), rng);
    double loss = 0.0;
    std::size_t pairs = 0;
    for (std::size_t u : order) {
      const auto s = split.train(u);
      for (std::size_t i = 0; i < s.size(); ++i) {
        const std::size_t lo = i > config.window ? i - config.window : 0;
        const std::size_t hi = std::min(s.size(), i + config.window + 1);
        for (std::size_t j = lo; j < hi; ++j) {
          if (j == i || s[j] == s[i]) continue;
          const double lr = config.lr * std::max(1e-4, 1.0 - static_cast<double>(step) / total_steps);
          ++step;
          auto center = in.row(s[i]);
          std::fill(grad.begin(), grad.end(), 0.0);
          double pair_loss = 0.0;
          for (std::size_t k = 0; k <= config.negatives; ++k) {
            const std::size_t target = k == 0 ? s[j] : draw();
            if (k > 0 && target == s[j]) continue;
            auto ctx = out.row(target);
            const double x = dot(center, ctx);
            const double label = k == 0 ? 1.0 : 0.0;
            pair_loss += neg_log_sigmoid(k == 0 ? x : -x);
            const double g = lr * (label - sigmoid(x));
            for (std::size_t c = 0; c < d; ++c) {
              grad[c] += g * ctx[c];
              ctx[c] += g * center[c];
            }
          }
          for (std::size_t c = 0; c < d; ++c) center[c] += grad[c];
          if (!std::isfinite(pair_loss)) {
            throw TrainingError("pretrain diverged at step " + std::to_string(step) + " (epoch " +
                                std::to_string(epoch) + ")");
          }
          loss += pair_loss;
          ++pairs;
        }
      }
    }
    result.epoch_loss.push_back(pairs ? loss / static_cast<double>(pairs) : 0.0);
  }
  // Exported vectors are input + output embeddings.
  in += out;
  result.table.rows = std::move(in);
  result.table.provenance = "id";
  result.table.meta = {{"method", "sgns-in+out"},         {"window", config.window}, {"negatives", config.negatives},
                       {"epochs", config.epochs},  {"lr", config.lr},         {"seed", config.seed},
                       {"split", split.fingerprint()}};
  return result;
}

std::vector<double> text_surrogate(const std::string& text, std::size_t d_text, std::uint64_t seed,
                                   std::size_t buckets) {
  if (d_text == 0 || buckets == 0) throw InputError("text surrogate: d_text and buckets must be positive");
  std::unordered_map<std::size_t, double> counts;
  for (const auto& tok : tokenize(text)) {
    const std::uint64_t h = fnv1a64(tok);
    counts[h % buckets] += (h >> 63) ? -1.0 : 1.0;
  }
  std::vector<std::pair<std::size_t, double>> sorted(counts.begin(), counts.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> v(d_text, 0.0);
  for (const auto& [bucket, count] : sorted) {
    if (count == 0.0) continue;
    std::mt19937_64 rng(mix_seed(seed, bucket));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& x : v) x += count * normal(rng);
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

EmbeddingTable text_surrogate_embeddings(const SplitDataset& split, std::size_t d_text, std::uint64_t seed,
                                         std::size_t buckets) {
  EmbeddingTable t;
  t.provenance = "text";
  t.rows = Matrix(split.n_items(), d_text);
  std::unordered_map<std::string, std::vector<double>> cache;
  for (std::size_t i = 0; i < split.n_items(); ++i) {
    const std::string& text = i < split.item_texts().size() ? split.item_texts()[i] : std::string();
    auto it = cache.find(text);
    if (it == cache.end()) it = cache.emplace(text, text_surrogate(text, d_text, seed, buckets)).first;
    std::copy(it->second.begin(), it->second.end(), t.rows.row(i).begin());
  }
  t.meta = {{"method", "hashed-projection"}, {"buckets", buckets}, {"seed", seed}, {"split", split.fingerprint()}};
  return t;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  const double na = std::sqrt(dot(a, a)), nb = std::sqrt(dot(b, b));
  return na == 0.0 || nb == 0.0 ? 0.0 : dot(a, b) / (na * nb);
}

}  // namespace specrec
