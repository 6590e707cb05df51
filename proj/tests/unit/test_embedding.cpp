// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "specrec/embedding.hpp"
#include "specrec/errors.hpp"
#include "test_support.hpp"

using namespace specrec;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("specrec_test_" + name);
}

SplitDataset synthetic_split(std::size_t users, std::size_t items, std::uint64_t seed, bool text = true) {
  SynthConfig c;
  c.users = users;
  c.items = items;
  c.seed = seed;
  c.with_text = text;
  return build_split(synthesize(c).log);
}

}  // namespace

TEST_SUITE("table files") {
  TEST_CASE("stream roundtrip keeps every bit") {
    std::mt19937_64 rng(1);
    EmbeddingTable t;
    t.rows = specrec::testing::random_matrix(7, 3, rng);
    t.provenance = "text";
    t.meta = {{"k", 1}};
    std::stringstream ss;
    write_embeddings(t, ss);
    const auto back = read_embeddings(ss);
    CHECK(back.rows == t.rows);
    CHECK(back.provenance == "text");
    CHECK(back.meta == t.meta);
    CHECK(back.header()["norms"]["max"].get<double>() > 0.0);
  }

  TEST_CASE("corruption and dimension checks") {
    EmbeddingTable t;
    t.rows = Matrix(2, 2, 1.0);
    const auto path = temp_path("emb.bin");
    save_embeddings(t, path);
    CHECK(load_embeddings(path, 2).rows == t.rows);
    CHECK_THROWS_AS(load_embeddings(path, 3), InputError);
    {
      std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
      f.seekp(-1, std::ios::end);
      f.put(0x41);
    }
    CHECK_THROWS_AS(load_embeddings(path), InputError);
    std::filesystem::remove(path);
  }

  TEST_CASE("external text vectors align by item token") {
    const auto split = SplitDataset::from_sequences({{0, 1, 2}}, 3);
    const auto path = temp_path("ext.tsv");
    {
      std::ofstream out(path);
      out << split.item_tokens()[2] << "\t7 8\n"
          << "unknown\t0 0\n"
          << split.item_tokens()[0] << "\t1 2\n"
          << split.item_tokens()[1] << "\t3 4\n";
    }
    const auto t = load_external(path, split, 2);
    CHECK(t.rows == Matrix{{1, 2}, {3, 4}, {7, 8}});
    CHECK(t.provenance == "external");
    CHECK_THROWS_AS(load_external(path, split, 3), InputError);
    {
      std::ofstream out(path);
      out << split.item_tokens()[0] << "\t1 2\n";
    }
    CHECK_THROWS_AS(load_external(path, split, 2), InputError);
    std::filesystem::remove(path);
  }
}

TEST_SUITE("skip-gram pretraining") {
  TEST_CASE("deterministic, honors dim, loss falls") {
    const auto split = synthetic_split(120, 60, 2);
    PretrainConfig cfg;
    cfg.epochs = 4;
    const auto a = pretrain_id_embeddings(split, cfg);
    const auto b = pretrain_id_embeddings(split, cfg);
    std::stringstream sa, sb;
    write_embeddings(a.table, sa);
    write_embeddings(b.table, sb);
    CHECK(sa.str() == sb.str());
    CHECK(a.table.dim() == 50);
    CHECK(a.table.n_items() == split.n_items());
    CHECK(a.epoch_loss.back() < a.epoch_loss.front());
  }

  TEST_CASE("co-consumed pair beats never-together pair") {
    // Items 0 and 1 always appear together; item 2 lives in separate histories.
    std::vector<std::vector<std::size_t>> seqs;
    for (int u = 0; u < 40; ++u) seqs.push_back({0, 1, 0, 1, 0, 1, 0, 1});
    for (int u = 0; u < 40; ++u) seqs.push_back({2, 2, 2, 2, 2});
    const auto split = SplitDataset::from_sequences(seqs, 3);
    PretrainConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 20;
    const auto t = pretrain_id_embeddings(split, cfg).table;
    CHECK(cosine_similarity(t.rows.row(0), t.rows.row(1)) > cosine_similarity(t.rows.row(0), t.rows.row(2)));
  }

  TEST_CASE("held-out adjacent pairs are closer than random pairs") {
    const auto split = synthetic_split(300, 80, 3);
    PretrainConfig cfg;
    cfg.epochs = 5;
    const auto t = pretrain_id_embeddings(split, cfg).table;
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<std::size_t> item(0, split.n_items() - 1);
    double adjacent = 0.0, random = 0.0;
    for (std::size_t u = 0; u < split.n_users(); ++u) {
      adjacent += cosine_similarity(t.rows.row(split.valid_target(u)), t.rows.row(split.test_target(u)));
      random += cosine_similarity(t.rows.row(item(rng)), t.rows.row(item(rng)));
    }
    CHECK(adjacent > random);
  }
}

TEST_SUITE("text surrogate") {
  TEST_CASE("identical text, empty text, unit norm") {
    const auto a = text_surrogate("Blue Train", 16, 5);
    CHECK(a == text_surrogate("blue train", 16, 5));
    double n = 0.0;
    for (double v : a) n += v * v;
    CHECK(n == doctest::Approx(1.0));
    for (double v : text_surrogate("", 16, 5)) CHECK(v == 0.0);
    CHECK(a != text_surrogate("red train", 16, 5));
  }

  TEST_CASE("table is stable across runs and zero without metadata") {
    const auto split = synthetic_split(80, 40, 6);
    const auto a = text_surrogate_embeddings(split, 12, 3);
    CHECK(a.rows == text_surrogate_embeddings(split, 12, 3).rows);
    CHECK(a.provenance == "text");
    const auto bare = synthetic_split(80, 40, 6, false);
    const auto zero = text_surrogate_embeddings(bare, 12, 3);
    for (double v : zero.rows.data()) CHECK(v == 0.0);
  }
}
