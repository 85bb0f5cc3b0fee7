// Copyright (c) 2026, The tara-toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
#include "tara/adapter.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "tara/error.hpp"
#include "tara/rng.hpp"

namespace tara {

AdapterParams AdapterParams::identity(std::size_t dim_in, std::size_t dim_out, bool with_bias) {
  if (dim_in == 0 || dim_out == 0) throw Error("adapter dimensions must be positive");
  AdapterParams p;
  p.weight = Matrix::Zero(static_cast<Eigen::Index>(dim_in), static_cast<Eigen::Index>(dim_out));
  for (std::size_t k = 0; k < std::min(dim_in, dim_out); ++k) p.weight(k, k) = 1.0;
  if (with_bias) p.bias = Vector::Zero(static_cast<Eigen::Index>(dim_out));
  return p;
}

std::string_view to_string(OptimizerKind k) { return k == OptimizerKind::adam ? "adam" : "sgd"; }

OptimizerKind parse_optimizer(std::string_view s) {
  if (s == "adam") return OptimizerKind::adam;
  if (s == "sgd") return OptimizerKind::sgd;
  throw Error(fmt::format("unknown optimizer '{}'", s));
}

void TrainConfig::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw Error(fmt::format("tau must be positive, got {}", tau));
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw Error(fmt::format("lr must be non-negative, got {}", lr));
  if (batch < 1) throw Error("batch must be at least 1");
  if (epochs < 1) throw Error("epochs must be at least 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw Error(fmt::format("beta1 must lie in [0, 1), got {}", beta1));
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw Error(fmt::format("beta2 must lie in [0, 1), got {}", beta2));
  if (!(eps > 0.0)) throw Error(fmt::format("eps must be positive, got {}", eps));
}

double AdapterGradient::norm() const {
  double sq = weight.squaredNorm();
  if (bias) sq += bias->squaredNorm();
  return std::sqrt(sq);
}

Matrix to_matrix(const EmbeddingMatrix& m) {
  Matrix out(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.dim()));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    for (std::size_t k = 0; k < m.dim(); ++k) out(i, k) = r[k];
  }
  return out;
}

namespace {

struct Projected {
  Matrix z;        // x W + b
  Vector norms;    // |z| per row
  Matrix u;        // z / |z|
};

Projected project(const AdapterParams& params, const Matrix& x, std::optional<std::size_t> step) {
  if (static_cast<std::size_t>(x.cols()) != params.dim_in()) {
    throw Error(fmt::format("dimension mismatch: input dim {}, adapter dim_in {}", x.cols(), params.dim_in()));
  }
  Projected p;
  p.z = x * params.weight;
  if (params.bias) p.z.rowwise() += params.bias->transpose();
  p.norms = p.z.rowwise().norm();
  for (Eigen::Index i = 0; i < p.norms.size(); ++i) {
    if (!(p.norms[i] > 0.0) || !std::isfinite(p.norms[i])) {
      throw Error(step ? fmt::format("non-finite or zero projection at step {} (row {})", *step, i)
                       : fmt::format("non-finite or zero projection (row {})", i));
    }
  }
  p.u = p.norms.cwiseInverse().asDiagonal() * p.z;
  return p;
}

// Row-wise softmax weights over the 2B in-batch logits and the loss.
struct ContrastiveTerms {
  double loss = 0.0;
  Matrix pi_pos;  // B x B
  Matrix pi_neg;  // B x B
};

ContrastiveTerms contrastive_terms(const Matrix& a, const Matrix& p, const Matrix& n, double tau,
                                   bool want_weights) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw Error(fmt::format("tau must be positive, got {}", tau));
  const auto b = a.rows();
  if (b < 1) throw Error("batch must be non-empty");
  if (p.rows() != b || n.rows() != b || p.cols() != a.cols() || n.cols() != a.cols()) {
    throw Error("anchors, positives and negatives must share batch size and dimension");
  }
  if (!a.allFinite() || !p.allFinite() || !n.allFinite()) throw Error("non-finite input to contrastive loss");

  const Matrix lp = (a * p.transpose()) / tau;
  const Matrix ln = (a * n.transpose()) / tau;
  ContrastiveTerms t;
  if (want_weights) {
    t.pi_pos.resize(b, b);
    t.pi_neg.resize(b, b);
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) {
    const double mx = std::max(lp.row(i).maxCoeff(), ln.row(i).maxCoeff());
    double sum = 0.0;
    for (Eigen::Index j = 0; j < b; ++j) sum += std::exp(lp(i, j) - mx) + std::exp(ln(i, j) - mx);
    const double lse = mx + std::log(sum);
    total += lse - lp(i, i);
    if (want_weights) {
      for (Eigen::Index j = 0; j < b; ++j) {
        t.pi_pos(i, j) = std::exp(lp(i, j) - lse);
        t.pi_neg(i, j) = std::exp(ln(i, j) - lse);
      }
    }
  }
  t.loss = total / static_cast<double>(b);
  if (!std::isfinite(t.loss)) throw Error("contrastive loss is not finite");
  return t;
}

// d/dz of a function of u = z/|z|, given g = d/du.
Matrix through_normalize(const Projected& p, const Matrix& g) {
  const Vector dots = (p.u.cwiseProduct(g)).rowwise().sum();
  Matrix dz = g - dots.asDiagonal() * p.u;
  return p.norms.cwiseInverse().asDiagonal() * dz;
}

}  // namespace

Matrix forward(const AdapterParams& params, const Matrix& x) { return project(params, x, std::nullopt).u; }

EmbeddingMatrix forward(const AdapterParams& params, const EmbeddingMatrix& x) {
  const Matrix u = forward(params, to_matrix(x));
  std::vector<float> data(static_cast<std::size_t>(u.size()));
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    // re-normalize after the float cast so the unit-norm flag holds
    double sq = 0.0;
    for (Eigen::Index k = 0; k < u.cols(); ++k) {
      const float v = static_cast<float>(u(i, k));
      data[i * u.cols() + k] = v;
      sq += static_cast<double>(v) * v;
    }
    const double inv = 1.0 / std::sqrt(sq);
    for (Eigen::Index k = 0; k < u.cols(); ++k) {
      auto& v = data[i * u.cols() + k];
      v = static_cast<float>(v * inv);
    }
  }
  return EmbeddingMatrix(x.ids(), static_cast<std::size_t>(u.cols()), std::move(data), true);
}

double infonce_loss(const Matrix& anchors, const Matrix& positives, const Matrix& negatives, double tau) {
  return contrastive_terms(anchors, positives, negatives, tau, false).loss;
}

double batch_loss(const AdapterParams& params, const TripletBatch& batch, double tau) {
  return loss_and_grad(params, batch, tau).loss;
}

LossAndGrad loss_and_grad(const AdapterParams& params, const TripletBatch& batch, double tau,
                          std::optional<std::size_t> step) {
  if (batch.size() == 0) throw Error("batch must be non-empty");
  const auto pa = project(params, batch.anchors, step);
  const auto pp = project(params, batch.positives, step);
  const auto pn = project(params, batch.negatives, step);
  const auto t = contrastive_terms(pa.u, pp.u, pn.u, tau, true);

  const double scale = 1.0 / (static_cast<double>(batch.size()) * tau);
  const Matrix ga = scale * (t.pi_pos * pp.u + t.pi_neg * pn.u - pp.u);
  const Matrix gp = scale * (t.pi_pos.transpose() * pa.u - pa.u);
  const Matrix gn = scale * (t.pi_neg.transpose() * pa.u);

  const Matrix dza = through_normalize(pa, ga);
  const Matrix dzp = through_normalize(pp, gp);
  const Matrix dzn = through_normalize(pn, gn);

  LossAndGrad out;
  out.loss = t.loss;
  out.grad.weight = batch.anchors.transpose() * dza + batch.positives.transpose() * dzp +
                    batch.negatives.transpose() * dzn;
  if (params.bias) {
    out.grad.bias = (dza.colwise().sum() + dzp.colwise().sum() + dzn.colwise().sum()).transpose();
  }
  if (!out.grad.weight.allFinite() || (out.grad.bias && !out.grad.bias->allFinite())) {
    throw Error(step ? fmt::format("non-finite gradient at step {}", *step) : "non-finite gradient");
  }
  return out;
}

// Gradients smaller than this are compared absolutely; finite differences
// cannot resolve them relatively.
constexpr double kGradFloor = 1e-6;

double grad_check(const AdapterParams& params, const TripletBatch& batch, double tau, double h) {
  if (!(h > 0.0)) throw Error("finite-difference step must be positive");
  const auto analytic = loss_and_grad(params, batch, tau);
  AdapterParams work = params;
  double worst = 0.0;
  auto probe = [&](double& slot, double a) {
    const double saved = slot;
    slot = saved + h;
    const double up = batch_loss(work, batch, tau);
    slot = saved - h;
    const double down = batch_loss(work, batch, tau);
    slot = saved;
    const double numeric = (up - down) / (2.0 * h);
    worst = std::max(worst, std::abs(a - numeric) / std::max(kGradFloor, std::abs(a) + std::abs(numeric)));
  };
  for (Eigen::Index i = 0; i < work.weight.rows(); ++i) {
    for (Eigen::Index j = 0; j < work.weight.cols(); ++j) probe(work.weight(i, j), analytic.grad.weight(i, j));
  }
  if (work.bias) {
    for (Eigen::Index j = 0; j < work.bias->size(); ++j) probe((*work.bias)[j], (*analytic.grad.bias)[j]);
  }
  return worst;
}

GradCheckInstance random_grad_instance(std::size_t dim, std::size_t batch, std::uint64_t seed) {
  if (dim == 0 || batch == 0) throw Error("grad-check instance needs positive dim and batch");
  Rng rng(seed);
  const auto d = static_cast<Eigen::Index>(dim);
  const auto b = static_cast<Eigen::Index>(batch);
  GradCheckInstance g;
  g.params = AdapterParams::identity(dim, dim, true);
  const double w_scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) g.params.weight(i, j) += w_scale * standard_normal(rng);
  }
  for (Eigen::Index j = 0; j < d; ++j) (*g.params.bias)[j] = 0.1 * standard_normal(rng);
  g.batch = {Matrix(b, d), Matrix(b, d), Matrix(b, d)};
  for (auto* m : {&g.batch.anchors, &g.batch.positives, &g.batch.negatives}) {
    for (Eigen::Index i = 0; i < b; ++i) {
      for (Eigen::Index k = 0; k < d; ++k) (*m)(i, k) = standard_normal(rng);
    }
  }
  return g;
}

TripletBatch gather_batch(const std::vector<Triplet>& triplets, std::span<const std::size_t> order,
                          const EmbeddingMatrix& base) {
  const auto rows = static_cast<Eigen::Index>(order.size());
  const auto dim = static_cast<Eigen::Index>(base.dim());
  TripletBatch b{Matrix(rows, dim), Matrix(rows, dim), Matrix(rows, dim)};
  auto copy = [&](Matrix& dst, Eigen::Index r, const std::string& sentence) {
    auto idx = base.index_of(sentence);
    if (!idx) throw Error(fmt::format("missing embedding for sentence '{}'", sentence));
    auto src = base.row(*idx);
    for (Eigen::Index k = 0; k < dim; ++k) dst(r, k) = src[k];
  };
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& t = triplets[order[r]];
    copy(b.anchors, r, t.anchor);
    copy(b.positives, r, t.positive);
    copy(b.negatives, r, t.negative);
  }
  return b;
}

namespace {

class Optimizer {
 public:
  Optimizer(const TrainConfig& c, const AdapterParams& p) : c_(c) {
    if (c_.optimizer == OptimizerKind::adam) {
      mw_ = Matrix::Zero(p.weight.rows(), p.weight.cols());
      vw_ = mw_;
      if (p.bias) {
        mb_ = Vector::Zero(p.bias->size());
        vb_ = *mb_;
      }
    }
  }

  void step(AdapterParams& p, const AdapterGradient& g) {
    if (c_.optimizer == OptimizerKind::sgd) {
      p.weight -= c_.lr * g.weight;
      if (p.bias) *p.bias -= c_.lr * *g.bias;
      return;
    }
    ++t_;
    const double c1 = 1.0 - std::pow(c_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(c_.beta2, static_cast<double>(t_));
    adam(p.weight, g.weight, mw_, vw_, c1, c2);
    if (p.bias) adam(*p.bias, *g.bias, *mb_, *vb_, c1, c2);
  }

 private:
  template <typename T>
  void adam(T& theta, const T& g, T& m, T& v, double c1, double c2) {
    m = c_.beta1 * m + (1.0 - c_.beta1) * g;
    v = c_.beta2 * v + (1.0 - c_.beta2) * g.cwiseProduct(g);
    theta.array() -= c_.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + c_.eps);
  }

  const TrainConfig& c_;
  std::size_t t_ = 0;
  Matrix mw_, vw_;
  std::optional<Vector> mb_, vb_;
};

}  // namespace

TrainResult train(const TripletDataset& dataset, const EmbeddingMatrix& base, const TrainConfig& config) {
  const std::size_t dim_out = config.dim_out == 0 ? base.dim() : config.dim_out;
  return train(dataset, base, config, AdapterParams::identity(base.dim(), dim_out, config.bias));
}

TrainResult train(const TripletDataset& dataset, const EmbeddingMatrix& base, const TrainConfig& config,
                  AdapterParams init) {
  config.validate();
  if (dataset.triplets.empty()) throw Error("training dataset is empty");
  if (init.dim_in() != base.dim()) {
    throw Error(fmt::format("adapter dim_in {} does not match embedding dim {}", init.dim_in(), base.dim()));
  }
  for (const auto& t : dataset.triplets) {
    for (const auto* s : {&t.anchor, &t.positive, &t.negative}) {
      if (!base.index_of(*s)) throw Error(fmt::format("missing embedding for sentence '{}'", *s));
    }
  }

  TrainResult result{std::move(init), {}};
  auto& params = result.params;
  auto& hist = result.history;
  const std::size_t n = dataset.triplets.size();
  hist.steps_per_epoch = (n + config.batch - 1) / config.batch;

  Rng rng(config.seed);
  Optimizer opt(config, params);
  std::vector<std::size_t> order(n);
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order, rng);
    double epoch_sum = 0.0;
    for (std::size_t lo = 0; lo < n; lo += config.batch) {
      const std::size_t hi = std::min(n, lo + config.batch);
      const auto batch = gather_batch(dataset.triplets, std::span(order).subspan(lo, hi - lo), base);
      const auto lg = loss_and_grad(params, batch, config.tau, step);
      hist.step_loss.push_back(lg.loss);
      epoch_sum += lg.loss;
      if (config.lr > 0.0) opt.step(params, lg.grad);
      ++step;
    }
    hist.epoch_mean_loss.push_back(epoch_sum / static_cast<double>(hist.steps_per_epoch));
    hist.epoch_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return result;
}

io::json to_json(const TrainConfig& c) {
  io::json j;
  j["tau"] = c.tau;
  j["lr"] = c.lr;
  j["batch"] = c.batch;
  j["epochs"] = c.epochs;
  j["optimizer"] = std::string(to_string(c.optimizer));
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["eps"] = c.eps;
  j["dim_out"] = c.dim_out;
  j["bias"] = c.bias;
  return j;
}

TrainConfig train_config_from_json(const io::json& j) {
  TrainConfig c;
  c.tau = j.value("tau", c.tau);
  c.lr = j.value("lr", c.lr);
  c.batch = j.value("batch", c.batch);
  c.epochs = j.value("epochs", c.epochs);
  c.optimizer = parse_optimizer(j.value("optimizer", std::string("adam")));
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.eps = j.value("eps", c.eps);
  c.dim_out = j.value("dim_out", c.dim_out);
  c.bias = j.value("bias", c.bias);
  return c;
}

std::string serialize_adapter(const AdapterParams& params, const TrainConfig& config) {
  io::json j;
  j["dim_in"] = params.dim_in();
  j["dim_out"] = params.dim_out();
  std::vector<double> w(params.weight.data(), params.weight.data() + params.weight.size());
  j["weight"] = w;
  if (params.bias) {
    j["bias"] = std::vector<double>(params.bias->data(), params.bias->data() + params.bias->size());
  } else {
    j["bias"] = nullptr;
  }
  j["config"] = to_json(config);
  j["seed"] = config.seed;
  return j.dump(2) + '\n';
}

LoadedAdapter load_adapter(const std::filesystem::path& path) {
  io::json j;
  try {
    j = io::json::parse(io::read_text(path));
  } catch (const io::json::exception& e) {
    throw Error(fmt::format("{}: {}", path.string(), e.what()));
  }
  try {
    const auto dim_in = j.at("dim_in").get<std::size_t>();
    const auto dim_out = j.at("dim_out").get<std::size_t>();
    const auto w = j.at("weight").get<std::vector<double>>();
    if (dim_in == 0 || dim_out == 0 || w.size() != dim_in * dim_out) {
      throw Error(fmt::format("weight has {} values, expected {} x {}", w.size(), dim_in, dim_out));
    }
    LoadedAdapter out;
    out.params.weight = Eigen::Map<const Matrix>(w.data(), static_cast<Eigen::Index>(dim_in),
                                                 static_cast<Eigen::Index>(dim_out));
    if (!j.at("bias").is_null()) {
      const auto b = j.at("bias").get<std::vector<double>>();
      if (b.size() != dim_out) throw Error(fmt::format("bias has {} values, expected {}", b.size(), dim_out));
      out.params.bias = Eigen::Map<const Vector>(b.data(), static_cast<Eigen::Index>(dim_out));
    }
    if (!out.params.weight.allFinite() || (out.params.bias && !out.params.bias->allFinite())) {
      throw Error("adapter parameters are not finite");
    }
    out.config = train_config_from_json(j.value("config", io::json::object()));
    out.config.seed = j.value("seed", out.config.seed);
    return out;
  } catch (const io::json::exception& e) {
    throw Error(fmt::format("{}: {}", path.string(), e.what()));
  } catch (const Error& e) {
    throw Error(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace tara
