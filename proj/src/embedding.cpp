// Copyright (c) 2026, The tara-toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
#include "tara/embedding.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cmath>
#include <thread>

#include <fmt/format.h>

#include "tara/error.hpp"

namespace tara {

EmbeddingMatrix::EmbeddingMatrix(std::vector<std::string> ids, std::size_t dim, std::vector<float> data,
                                 bool normalized)
    : ids_(std::move(ids)), dim_(dim), data_(std::move(data)), normalized_(normalized) {
  if (dim_ == 0) throw Error("embedding dim must be at least 1");
  if (data_.size() != ids_.size() * dim_) {
    throw Error(fmt::format("embedding data has {} values, expected {} x {}", data_.size(), ids_.size(), dim_));
  }
  index_.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!index_.emplace(ids_[i], i).second) throw Error(fmt::format("duplicate embedding id '{}'", ids_[i]));
    auto r = row(i);
    double sq = 0.0;
    for (float v : r) {
      if (!std::isfinite(v)) throw Error(fmt::format("embedding row '{}' has a non-finite value", ids_[i]));
      sq += static_cast<double>(v) * v;
    }
    if (normalized_ && std::abs(std::sqrt(sq) - 1.0) > kUnitNormTolerance) {
      throw Error(fmt::format("embedding row '{}' is flagged normalized but has norm {}", ids_[i], std::sqrt(sq)));
    }
  }
}

std::optional<std::size_t> EmbeddingMatrix::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const float> EmbeddingMatrix::row(std::string_view id) const {
  auto i = index_of(id);
  if (!i) throw Error(fmt::format("no embedding for '{}'", id));
  return row(*i);
}

EmbeddingMatrix EmbeddingMatrix::select(const std::vector<std::string>& ids) const {
  std::vector<float> data;
  data.reserve(ids.size() * dim_);
  for (const auto& id : ids) {
    auto r = row(std::string_view(id));
    data.insert(data.end(), r.begin(), r.end());
  }
  return EmbeddingMatrix(ids, dim_, std::move(data), normalized_);
}

bool EmbeddingMatrix::operator==(const EmbeddingMatrix& other) const {
  return ids_ == other.ids_ && dim_ == other.dim_ && normalized_ == other.normalized_ &&
         std::equal(data_.begin(), data_.end(), other.data_.begin(), other.data_.end(),
                    [](float x, float y) { return std::bit_cast<std::uint32_t>(x) == std::bit_cast<std::uint32_t>(y); });
}

EmbeddingMatrix l2_normalize(const EmbeddingMatrix& m) {
  std::vector<float> out(m.data());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    double sq = 0.0;
    for (float v : r) sq += static_cast<double>(v) * v;
    if (sq == 0.0) throw Error(fmt::format("cannot normalize zero-norm row '{}'", m.ids()[i]));
    const double inv = 1.0 / std::sqrt(sq);
    for (std::size_t k = 0; k < m.dim(); ++k) {
      out[i * m.dim() + k] = static_cast<float>(static_cast<double>(r[k]) * inv);
    }
  }
  return EmbeddingMatrix(m.ids(), m.dim(), std::move(out), true);
}

double dot(std::span<const float> x, std::span<const float> y) {
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) acc += static_cast<double>(x[k]) * static_cast<double>(y[k]);
  return acc;
}

SimilarityMatrix sim_matrix(const EmbeddingMatrix& queries, const EmbeddingMatrix& gallery, unsigned threads) {
  if (queries.dim() != gallery.dim()) {
    throw Error(fmt::format("dimension mismatch: queries have dim {}, gallery has dim {}", queries.dim(),
                            gallery.dim()));
  }
  if (!queries.normalized() || !gallery.normalized()) throw Error("sim_matrix requires normalized inputs");
  SimilarityMatrix s{queries.rows(), gallery.rows(), std::vector<double>(queries.rows() * gallery.rows())};
  auto fill = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      for (std::size_t j = 0; j < gallery.rows(); ++j) s(i, j) = dot(queries.row(i), gallery.row(j));
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, queries.rows())));
  if (threads <= 1) {
    fill(0, queries.rows());
    return s;
  }
  {
    std::vector<std::jthread> workers;
    const std::size_t chunk = (queries.rows() + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t lo = t * chunk;
      const std::size_t hi = std::min(queries.rows(), lo + chunk);
      if (lo < hi) workers.emplace_back(fill, lo, hi);
    }
  }
  return s;
}

}  // namespace tara
