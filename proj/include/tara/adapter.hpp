// Copyright (c) 2026, The tara-toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Linear projection adapter trained on frozen text embeddings with an
// in-batch contrastive loss over (anchor, positive, hard negative) triplets.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "tara/composer.hpp"
#include "tara/embedding.hpp"
#include "tara/io.hpp"

namespace tara {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// y = normalize(x W + b), with W of shape dim_in x dim_out.
struct AdapterParams {
  Matrix weight;
  std::optional<Vector> bias;

  std::size_t dim_in() const { return static_cast<std::size_t>(weight.rows()); }
  std::size_t dim_out() const { return static_cast<std::size_t>(weight.cols()); }
  std::size_t size() const { return weight.size() + (bias ? bias->size() : 0); }

  /// Identity on the first min(dim_in, dim_out) coordinates, zero elsewhere;
  /// zero bias. Step 0 therefore reproduces base similarities when
  /// dim_out == dim_in.
  static AdapterParams identity(std::size_t dim_in, std::size_t dim_out, bool with_bias = true);
};

enum class OptimizerKind { sgd, adam };

std::string_view to_string(OptimizerKind k);
OptimizerKind parse_optimizer(std::string_view s);

struct TrainConfig {
  double tau = 0.05;
  double lr = 1e-3;
  std::size_t batch = 256;
  std::size_t epochs = 2;
  std::uint64_t seed = 17;
  OptimizerKind optimizer = OptimizerKind::adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t dim_out = 0;  // 0 keeps the input dimension
  bool bias = true;

  /// Throws tara::Error on the first violated range constraint. lr = 0 is
  /// accepted and freezes the parameters.
  void validate() const;
};

struct TrainHistory {
  std::vector<double> step_loss;
  std::vector<double> epoch_mean_loss;
  std::vector<double> epoch_seconds;
  std::size_t steps_per_epoch = 0;
};

/// Base embeddings of one batch; row i of each matrix forms triplet i.
struct TripletBatch {
  Matrix anchors;
  Matrix positives;
  Matrix negatives;

  std::size_t size() const { return static_cast<std::size_t>(anchors.rows()); }
};

struct AdapterGradient {
  Matrix weight;
  std::optional<Vector> bias;

  double norm() const;
};

struct LossAndGrad {
  double loss = 0.0;
  AdapterGradient grad;
};

Matrix to_matrix(const EmbeddingMatrix& m);

/// Projects and L2-normalizes every row.
Matrix forward(const AdapterParams& params, const Matrix& x);
EmbeddingMatrix forward(const AdapterParams& params, const EmbeddingMatrix& x);

/// Mean over i of -log(exp(<a_i,p_i>/tau) / sum_j [exp(<a_i,p_j>/tau) + exp(<a_i,n_j>/tau)]).
/// Rows must be unit vectors; evaluated with max-subtraction.
double infonce_loss(const Matrix& anchors, const Matrix& positives, const Matrix& negatives, double tau);

/// Loss of the forward-mapped batch and its exact gradient w.r.t. weight and
/// bias. `step` only labels error messages.
LossAndGrad loss_and_grad(const AdapterParams& params, const TripletBatch& batch, double tau,
                          std::optional<std::size_t> step = std::nullopt);

/// Loss only; same code path as loss_and_grad.
double batch_loss(const AdapterParams& params, const TripletBatch& batch, double tau);

/// Max over parameters of |analytic - numeric| / max(1e-12, |analytic| + |numeric|),
/// numeric being the central difference with step h.
double grad_check(const AdapterParams& params, const TripletBatch& batch, double tau, double h);

/// Random weights near identity, random bias, and Gaussian base rows; used
/// by `gradcheck`.
struct GradCheckInstance {
  AdapterParams params;
  TripletBatch batch;
};
GradCheckInstance random_grad_instance(std::size_t dim, std::size_t batch, std::uint64_t seed);

/// Gathers base embeddings for a slice of triplets; throws naming the first
/// sentence without an embedding.
TripletBatch gather_batch(const std::vector<Triplet>& triplets, std::span<const std::size_t> order,
                          const EmbeddingMatrix& base);

struct TrainResult {
  AdapterParams params;
  TrainHistory history;
};

TrainResult train(const TripletDataset& dataset, const EmbeddingMatrix& base, const TrainConfig& config);
/// Continues from `init` instead of the identity initialization.
TrainResult train(const TripletDataset& dataset, const EmbeddingMatrix& base, const TrainConfig& config,
                  AdapterParams init);

io::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const io::json& j);

/// {"dim_in","dim_out","weight","bias","config","seed"}
std::string serialize_adapter(const AdapterParams& params, const TrainConfig& config);
struct LoadedAdapter {
  AdapterParams params;
  TrainConfig config;
};
LoadedAdapter load_adapter(const std::filesystem::path& path);

}  // namespace tara
