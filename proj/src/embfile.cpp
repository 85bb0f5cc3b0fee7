// Copyright (c) 2026, The tara-toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
#include "tara/embfile.hpp"

#include <bit>
#include <cstring>
#include <limits>

#include <fmt/format.h>

#include "tara/error.hpp"
#include "tara/io.hpp"

namespace tara {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  const auto s = io::read_text(path);
  return {s.begin(), s.end()};
}

}  // namespace

std::vector<std::uint8_t> encode_embeddings(const EmbeddingMatrix& m) {
  if (m.rows() > std::numeric_limits<std::uint32_t>::max() || m.dim() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error("embedding matrix too large for TARAEMB1");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kEmbHeaderSize + m.data().size() * 4);
  out.insert(out.end(), std::begin(kEmbMagic), std::end(kEmbMagic));
  put_u32(out, kEmbVersion);
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.dim()));
  out.push_back(0);
  out.push_back(m.normalized() ? 1 : 0);
  out.insert(out.end(), 2, 0);
  for (float v : m.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

std::string encode_manifest(const std::vector<std::string>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    io::json j;
    j["row"] = i;
    j["id"] = ids[i];
    out += io::to_line(j);
    out += '\n';
  }
  return out;
}

EmbFileHeader decode_header(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kEmbHeaderSize) {
    throw Error(fmt::format("size mismatch: file has {} bytes, header needs {}", bytes.size(), kEmbHeaderSize));
  }
  if (std::memcmp(bytes.data(), kEmbMagic, sizeof kEmbMagic) != 0) throw Error("bad magic");
  EmbFileHeader h;
  h.version = get_u32(bytes.data() + 8);
  h.rows = get_u32(bytes.data() + 12);
  h.dim = get_u32(bytes.data() + 16);
  h.dtype = bytes[20];
  if (h.version != kEmbVersion) throw Error(fmt::format("unsupported version {}", h.version));
  if (h.dtype != 0) throw Error(fmt::format("unsupported dtype {}", h.dtype));
  if (bytes[21] > 1) throw Error(fmt::format("bad normalized flag {}", bytes[21]));
  h.normalized = bytes[21] == 1;
  if (bytes[22] != 0 || bytes[23] != 0) throw Error("reserved header bytes are not zero");
  const std::uint64_t expected = kEmbHeaderSize + std::uint64_t{h.rows} * h.dim * 4;
  if (bytes.size() != expected) {
    throw Error(fmt::format("size mismatch: expected {} bytes, got {}", expected, bytes.size()));
  }
  return h;
}

std::filesystem::path default_manifest_path(const std::filesystem::path& emb_path) {
  auto p = emb_path;
  p += ".ids.jsonl";
  return p;
}

void write_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path,
                      const std::filesystem::path& manifest_path) {
  const auto bytes = encode_embeddings(m);
  io::write_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  io::write_atomic(manifest_path, encode_manifest(m.ids()));
}

void write_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path) {
  write_embeddings(m, path, default_manifest_path(path));
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path, const std::filesystem::path& manifest_path) {
  const auto bytes = read_bytes(path);
  EmbFileHeader h;
  try {
    h = decode_header(bytes);
  } catch (const Error& e) {
    throw Error(fmt::format("{}: {}", path.string(), e.what()));
  }
  std::vector<std::string> ids(h.rows);
  std::vector<bool> seen(h.rows, false);
  io::for_each_jsonl(manifest_path, [&](std::size_t line, const io::json& obj) {
    const auto row = obj.at("row").get<std::int64_t>();
    if (row < 0 || static_cast<std::uint64_t>(row) >= h.rows) {
      throw Error(fmt::format("{}:{}: row {} out of range for {} rows", manifest_path.string(), line, row, h.rows));
    }
    if (seen[row]) throw Error(fmt::format("{}:{}: duplicate row {}", manifest_path.string(), line, row));
    seen[row] = true;
    ids[row] = obj.at("id").get<std::string>();
  });
  for (std::size_t r = 0; r < h.rows; ++r) {
    if (!seen[r]) throw Error(fmt::format("{}: manifest has no entry for row {}", manifest_path.string(), r));
  }
  std::vector<float> data(std::size_t{h.rows} * h.dim);
  for (std::size_t k = 0; k < data.size(); ++k) {
    data[k] = std::bit_cast<float>(get_u32(bytes.data() + kEmbHeaderSize + 4 * k));
  }
  try {
    return EmbeddingMatrix(std::move(ids), h.dim, std::move(data), h.normalized);
  } catch (const Error& e) {
    throw Error(fmt::format("{}: {}", path.string(), e.what()));
  }
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
  return read_embeddings(path, default_manifest_path(path));
}

}  // namespace tara
