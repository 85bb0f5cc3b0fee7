// Copyright (c) 2026, The tara-toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tara {

/// Row-major float32 matrix with one unique id per row.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  /// Throws tara::Error on shape mismatch, duplicate ids, non-finite values,
  /// or normalized=true with a row whose norm is not within 1e-5 of 1.
  EmbeddingMatrix(std::vector<std::string> ids, std::size_t dim, std::vector<float> data, bool normalized = false);

  std::size_t rows() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }
  bool normalized() const { return normalized_; }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<float>& data() const { return data_; }

  std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  std::optional<std::size_t> index_of(std::string_view id) const;
  /// Throws tara::Error naming the id when absent.
  std::span<const float> row(std::string_view id) const;

  /// Rows for `ids` in the given order.
  EmbeddingMatrix select(const std::vector<std::string>& ids) const;

  bool operator==(const EmbeddingMatrix& other) const;

 private:
  std::vector<std::string> ids_;
  std::size_t dim_ = 0;
  std::vector<float> data_;
  bool normalized_ = false;
  std::unordered_map<std::string, std::size_t> index_;
};

inline constexpr double kUnitNormTolerance = 1e-5;

/// Row-wise division by the Euclidean norm; throws naming a zero-norm row.
EmbeddingMatrix l2_normalize(const EmbeddingMatrix& m);

/// Dense |queries| x |gallery| matrix, row-major, float64.
struct SimilarityMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
};

double dot(std::span<const float> x, std::span<const float> y);

/// Cosine similarity of every query row with every gallery row. Both inputs
/// must be normalized. Rows are split across `threads` workers (0 means
/// hardware concurrency); results do not depend on the split.
SimilarityMatrix sim_matrix(const EmbeddingMatrix& queries, const EmbeddingMatrix& gallery,
                            unsigned threads = 1);

}  // namespace tara
