// Copyright (c) 2026, The tara-toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
#include <cmath>

#include <doctest.h>

#include "oracles.hpp"
#include "tara/adapter.hpp"
#include "tara/error.hpp"
#include "test_util.hpp"

using namespace tara;

namespace {

// Small dataset over a 4-d sentence table.
struct Toy {
  EmbeddingMatrix base;
  TripletDataset ds;
};

Toy toy() {
  Rng rng(21);
  std::vector<std::string> ids;
  std::vector<float> data;
  for (int i = 0; i < 12; ++i) {
    ids.push_back(fmt::format("s{}", i));
    for (int j = 0; j < 4; ++j) data.push_back(static_cast<float>(standard_normal(rng)));
  }
  Toy t{l2_normalize(EmbeddingMatrix(ids, 4, data)), {}};
  for (int i = 0; i < 10; ++i) {
    t.ds.triplets.push_back({ids[i], ids[(i + 1) % 12], ids[(i + 5) % 12], TripletKind::static_bias, std::nullopt});
  }
  t.ds.n_static = 10;
  return t;
}

}  // namespace

TEST_SUITE("adapter") {
  TEST_CASE("identity adapter reproduces unit inputs") {
    Matrix x(2, 3);
    x << 0.6, 0.0, 0.8, 0.0, 1.0, 0.0;
    const auto y = forward(AdapterParams::identity(3, 3), x);
    CHECK((y - x).cwiseAbs().maxCoeff() < 1e-6);
  }

  TEST_CASE("hand-computed 2x3 projection") {
    AdapterParams p;
    p.weight = Matrix(2, 3);
    p.weight << 1, 2, 0, 0, 1, 2;
    p.bias = Vector::Zero(3);
    Matrix x(1, 2);
    x << 1, 1;
    // [1, 3, 2] / sqrt(14)
    const auto y = forward(p, x);
    const double n = std::sqrt(14.0);
    CHECK(y(0, 0) == doctest::Approx(1 / n).epsilon(1e-12));
    CHECK(y(0, 1) == doctest::Approx(3 / n).epsilon(1e-12));
    CHECK(y(0, 2) == doctest::Approx(2 / n).epsilon(1e-12));
  }

  TEST_CASE("outputs are unit norm for any weight") {
    const auto g = random_grad_instance(6, 5, 3);
    const auto y = forward(g.params, g.batch.anchors);
    for (Eigen::Index i = 0; i < y.rows(); ++i) CHECK(y.row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("loss scalar cases") {
    Matrix a(1, 2), p(1, 2), n(1, 2);
    a << 1, 0;
    p << 1, 0;
    n << -1, 0;
    CHECK(infonce_loss(a, p, n, 1.0) == doctest::Approx(std::log1p(std::exp(-2.0))).epsilon(1e-14));
    CHECK(infonce_loss(a, p, n, 1.0) == doctest::Approx(0.126928).epsilon(1e-6));
    CHECK(infonce_loss(a, a, a, 0.05) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  }

  TEST_CASE("loss matches the naive transcription for B=2") {
    const auto g = random_grad_instance(5, 2, 8);
    const auto a = forward(g.params, g.batch.anchors);
    const auto p = forward(g.params, g.batch.positives);
    const auto n = forward(g.params, g.batch.negatives);
    auto rows = [](const Matrix& m) {
      oracle::Rows r(m.rows(), std::vector<double>(m.cols()));
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) r[i][j] = m(i, j);
      return r;
    };
    CHECK(std::abs(infonce_loss(a, p, n, 0.1) - oracle::naive_infonce(rows(a), rows(p), rows(n), 0.1)) < 1e-10);
  }

  TEST_CASE("loss is invariant to a joint permutation of the batch") {
    const auto g = random_grad_instance(4, 6, 2);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(6);
    perm.indices() << 3, 0, 5, 1, 4, 2;
    TripletBatch shuffled{perm * g.batch.anchors, perm * g.batch.positives, perm * g.batch.negatives};
    CHECK(batch_loss(g.params, shuffled, 0.2) == doctest::Approx(batch_loss(g.params, g.batch, 0.2)).epsilon(1e-12));
  }

  TEST_CASE("gradient check on a small instance and step-size trend") {
    const auto g = random_grad_instance(8, 4, 1);
    const double fine = grad_check(g.params, g.batch, 0.05, 1e-4);
    CHECK(fine < 1e-4);
    CHECK(grad_check(g.params, g.batch, 0.05, 1e-2) > fine);
  }

  TEST_CASE("identical positives and negatives give no learning signal") {
    auto g = random_grad_instance(4, 1, 6);
    g.batch.negatives = g.batch.positives;
    const auto lg = loss_and_grad(g.params, g.batch, 0.5);
    CHECK(lg.grad.norm() < 1e-8);
    CHECK(lg.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(grad_check(g.params, g.batch, 0.5, 1e-4) < 1e-3);
  }

  TEST_CASE("zero learning rate freezes the adapter") {
    auto t = toy();
    TrainConfig c;
    c.lr = 0;
    c.batch = 10;  // one full batch, so every epoch sees the same in-batch negatives
    c.epochs = 3;
    const auto r = train(t.ds, t.base, c);
    const auto init = AdapterParams::identity(4, 4);
    CHECK(r.params.weight == init.weight);
    CHECK(*r.params.bias == *init.bias);
    for (double l : r.history.epoch_mean_loss) CHECK(l == doctest::Approx(r.history.epoch_mean_loss.front()).epsilon(1e-12));
  }

  TEST_CASE("training is bit-reproducible and lowers the loss") {
    auto t = toy();
    TrainConfig c;
    c.batch = 5;
    c.epochs = 30;
    c.lr = 0.02;
    c.tau = 0.1;
    const auto a = train(t.ds, t.base, c);
    const auto b = train(t.ds, t.base, c);
    CHECK(a.params.weight == b.params.weight);
    CHECK(a.history.step_loss == b.history.step_loss);
    CHECK(a.history.epoch_mean_loss.back() < a.history.epoch_mean_loss.front());
    CHECK(a.history.steps_per_epoch == 2);
    c.optimizer = OptimizerKind::sgd;
    c.lr = 0.5;
    const auto s = train(t.ds, t.base, c);
    CHECK(s.history.epoch_mean_loss.back() < s.history.epoch_mean_loss.front());
  }

  TEST_CASE("config validation and missing sentences") {
    TrainConfig c;
    c.tau = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.batch = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    auto t = toy();
    t.ds.triplets[0].negative = "unknown sentence";
    CHECK_THROWS_WITH_AS(train(t.ds, t.base, TrainConfig{}), doctest::Contains("unknown sentence"), Error);
  }

  TEST_CASE("adapter JSON roundtrip") {
    auto t = toy();
    TrainConfig c;
    c.batch = 4;
    c.dim_out = 3;
    c.bias = false;
    const auto r = train(t.ds, t.base, c);
    CHECK(r.params.dim_out() == 3);
    CHECK_FALSE(r.params.bias);
    const auto dir = testutil::temp_dir("adapter_json");
    testutil::write_file(dir / "a.json", serialize_adapter(r.params, c));
    const auto back = load_adapter(dir / "a.json");
    CHECK(back.params.weight == r.params.weight);
    CHECK_FALSE(back.params.bias);
    CHECK(back.config.dim_out == 3);
    CHECK(serialize_adapter(back.params, back.config) == serialize_adapter(r.params, c));
  }
}
