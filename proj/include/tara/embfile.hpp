// Copyright (c) 2026, The tara-toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// TARAEMB1: little-endian float32 embedding matrix plus a JSON-lines id
// manifest. Layout of the 24-byte header:
//
//   offset  size  field
//   0       8     magic "TARAEMB1"
//   8       4     version (u32 LE) = 1
//   12      4     rows (u32 LE)
//   16      4     dim (u32 LE)
//   20      1     dtype, 0 = IEEE-754 binary32
//   21      1     normalized flag, 0 or 1
//   22      2     reserved, zero
//
// The payload follows as rows * dim little-endian floats, row-major. The
// manifest holds one {"row": int, "id": str} object per line in row order.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tara/embedding.hpp"

namespace tara {

inline constexpr std::size_t kEmbHeaderSize = 24;
inline constexpr char kEmbMagic[8] = {'T', 'A', 'R', 'A', 'E', 'M', 'B', '1'};
inline constexpr std::uint32_t kEmbVersion = 1;

struct EmbFileHeader {
  std::uint32_t version = kEmbVersion;
  std::uint32_t rows = 0;
  std::uint32_t dim = 0;
  std::uint8_t dtype = 0;
  bool normalized = false;
};

std::vector<std::uint8_t> encode_embeddings(const EmbeddingMatrix& m);
std::string encode_manifest(const std::vector<std::string>& ids);
EmbFileHeader decode_header(const std::vector<std::uint8_t>& bytes);

/// Sidecar path used when no manifest path is given: "<path>.ids.jsonl".
std::filesystem::path default_manifest_path(const std::filesystem::path& emb_path);

void write_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path,
                      const std::filesystem::path& manifest_path);
void write_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path);

EmbeddingMatrix read_embeddings(const std::filesystem::path& path, const std::filesystem::path& manifest_path);
EmbeddingMatrix read_embeddings(const std::filesystem::path& path);

}  // namespace tara
