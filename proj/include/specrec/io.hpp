// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>

namespace specrec {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64(std::span<const double> values, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

// splitmix64 of seed combined with a stream index; decorrelates derived RNGs.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

std::string read_text_file(const std::filesystem::path& path);

/// Writes go to a sibling temp file that replaces `path` only on commit().
/// Destroying an uncommitted AtomicFile deletes the temp file, so a failed
/// command leaves no partial output behind.
class AtomicFile {
 public:
  explicit AtomicFile(std::filesystem::path path, bool binary = false);
  ~AtomicFile();
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;

  std::ofstream& stream() { return out_; }
  void commit();

 private:
  std::filesystem::path path_;
  std::filesystem::path tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

void write_text_file(const std::filesystem::path& path, std::string_view text);

// Little-endian 64-bit float block helpers.
void write_f64_le(std::ostream& out, std::span<const double> values);
void read_f64_le(std::istream& in, std::span<double> values, const std::string& what);

}  // namespace specrec
