// Copyright (c) 2026, The tara-toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "oracles.hpp"
#include "tara/adapter.hpp"
#include "tara/cli.hpp"
#include "tara/composer.hpp"
#include "tara/embfile.hpp"
#include "tara/evaluator.hpp"
#include "tara/io.hpp"
#include "tara/rng.hpp"

namespace fs = std::filesystem;
using namespace tara;

namespace {

const fs::path kSource = TARA_SOURCE_DIR;

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / fmt::format("tara_acceptance_{}", name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) { return io::read_text(p); }

oracle::Rows rows_of(const Matrix& m) {
  oracle::Rows out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  }
  return out;
}

// Normalizes each row in double and stores the result as a normalized matrix.
EmbeddingMatrix unit_rows(std::vector<std::string> ids, const std::vector<std::vector<double>>& rows) {
  const std::size_t dim = rows.front().size();
  std::vector<float> data;
  for (const auto& r : rows) {
    const double n = std::sqrt(oracle::dotp(r, r));
    for (double v : r) data.push_back(static_cast<float>(v / n));
  }
  return EmbeddingMatrix(std::move(ids), dim, std::move(data), true);
}

// Runs the command line with its stdout summary discarded.
int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "tara");
  std::ostringstream sink;
  auto* saved = std::cout.rdbuf(sink.rdbuf());
  const int rc = cli::run(args);
  std::cout.rdbuf(saved);
  return rc;
}

// ---------------------------------------------------------------------------

Outcome gradient_correctness() {
  const auto t0 = Clock::now();
  const std::size_t dims[] = {4, 8, 16};
  const std::size_t batches[] = {1, 2, 8};
  const double taus[] = {0.05, 0.5, 1.0};
  const double h = 1e-5;
  double worst = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    const auto dim = dims[inst % 3];
    const auto b = batches[(inst / 3) % 3];
    const auto tau = taus[(inst / 9) % 3];
    auto g = random_grad_instance(dim, b, 1000 + static_cast<std::uint64_t>(inst));
    const auto analytic = loss_and_grad(g.params, g.batch, tau);

    auto w = rows_of(g.params.weight);
    std::vector<double> bias(g.params.bias->data(), g.params.bias->data() + g.params.bias->size());
    const auto xa = rows_of(g.batch.anchors);
    const auto xp = rows_of(g.batch.positives);
    const auto xn = rows_of(g.batch.negatives);
    auto loss = [&] {
      return oracle::naive_infonce(oracle::project(xa, w, &bias), oracle::project(xp, w, &bias),
                                   oracle::project(xn, w, &bias), tau);
    };
    auto central = [&](double& slot) {
      const double saved = slot;
      slot = saved + h;
      const double up = loss();
      slot = saved - h;
      const double down = loss();
      slot = saved;
      return (up - down) / (2 * h);
    };
    auto rel = [](double a, double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-6}); };
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) worst = std::max(worst, rel(analytic.grad.weight(i, j), central(w[i][j])));
    }
    for (std::size_t j = 0; j < dim; ++j) worst = std::max(worst, rel((*analytic.grad.bias)[j], central(bias[j])));
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 10.0, fmt::format("50 instances, max rel err {:.3e} (< 1e-4), {:.2f}s (< 10s)",
                                                   worst, secs)};
}

Outcome loss_oracle() {
  Rng rng(7);
  double worst = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    const auto b = 1 + static_cast<Eigen::Index>(uniform_index(rng, 16));
    const auto d = 2 + static_cast<Eigen::Index>(uniform_index(rng, 31));
    const double tau = 0.02 + uniform_unit(rng);
    Matrix a(b, d), p(b, d), n(b, d);
    for (auto* m : {&a, &p, &n}) {
      for (Eigen::Index i = 0; i < b; ++i) {
        for (Eigen::Index k = 0; k < d; ++k) (*m)(i, k) = standard_normal(rng);
        m->row(i).normalize();
      }
    }
    const double got = infonce_loss(a, p, n, tau);
    const double want = oracle::naive_infonce(rows_of(a), rows_of(p), rows_of(n), tau);
    worst = std::max(worst, std::abs(got - want));
  }
  Matrix one(1, 3);
  one << 0.6, 0.0, 0.8;
  const double eq = infonce_loss(one, one, one, 0.05);
  const double ln2_err = std::abs(eq - std::log(2.0));
  return {worst < 1e-10 && ln2_err < 1e-12,
          fmt::format("100 batches max |diff| {:.3e} (< 1e-10); equal-logit B=1 |L - ln2| {:.3e} (< 1e-12)", worst,
                      ln2_err)};
}

Outcome metric_oracles() {
  Rng rng(11);
  std::size_t mismatches = 0;
  for (int inst = 0; inst < 200; ++inst) {
    RetrievalTask task;
    const std::size_t g = 2 + uniform_index(rng, 99);
    const std::size_t nq = 1 + uniform_index(rng, 50);
    const bool two_way = inst % 4 == 0;
    const bool coarse = inst % 2 == 1;  // coarse scores produce ties
    for (std::size_t i = 0; i < g; ++i) task.gallery.push_back(fmt::format("g{}", i));
    SimilarityMatrix sims{nq, g, std::vector<double>(nq * g)};
    for (auto& v : sims.values) v = coarse ? std::floor(uniform_unit(rng) * 8) / 8 : 2 * uniform_unit(rng) - 1;
    for (std::size_t q = 0; q < nq; ++q) {
      RetrievalQuery rq;
      rq.id = fmt::format("q{}", q);
      const std::size_t m = two_way ? 2 : 1 + uniform_index(rng, g);
      rq.candidates = sample_without_replacement(g, m, rng);
      std::sort(rq.candidates.begin(), rq.candidates.end());
      const std::size_t r = two_way ? 1 : 1 + uniform_index(rng, m);
      for (auto idx : sample_without_replacement(m, r, rng)) rq.relevant.push_back(rq.candidates[idx]);
      std::sort(rq.relevant.begin(), rq.relevant.end());
      task.queries.push_back(std::move(rq));
    }
    for (std::size_t k : {std::size_t{1}, std::size_t{5}, g}) {
      if (k > g) continue;
      const auto got = recall_per_query(sims, task, k);
      for (std::size_t q = 0; q < nq; ++q) {
        const std::vector<double> row(sims.row(q).begin(), sims.row(q).end());
        const std::set<std::size_t> rel(task.queries[q].relevant.begin(), task.queries[q].relevant.end());
        mismatches += got[q] != oracle::recall(row, task.queries[q].candidates, rel, k);
      }
    }
    const auto ap = average_precision_per_query(sims, task);
    for (std::size_t q = 0; q < nq; ++q) {
      const std::vector<double> row(sims.row(q).begin(), sims.row(q).end());
      const std::set<std::size_t> rel(task.queries[q].relevant.begin(), task.queries[q].relevant.end());
      mismatches += ap[q] != oracle::average_precision(row, task.queries[q].candidates, rel);
    }
    if (two_way) {
      const auto bin = binary_per_query(sims, task);
      for (std::size_t q = 0; q < nq; ++q) {
        const auto& rq = task.queries[q];
        const auto pos = rq.relevant[0];
        const auto neg = rq.candidates[0] == pos ? rq.candidates[1] : rq.candidates[0];
        mismatches += bin[q] != oracle::binary(sims(q, pos), sims(q, neg));
      }
    }
    std::vector<McqItem> items;
    std::vector<double> oracle_hits;
    for (std::size_t q = 0; q < nq; ++q) {
      McqItem it;
      const std::size_t dim = 3 + uniform_index(rng, 6);
      auto vec = [&] {
        std::vector<float> v(dim);
        for (auto& x : v) x = coarse ? static_cast<float>(uniform_index(rng, 3)) - 1.0f + 0.25f
                                     : static_cast<float>(standard_normal(rng));
        return v;
      };
      it.query = vec();
      const std::size_t c = 2 + uniform_index(rng, 5);
      for (std::size_t j = 0; j < c; ++j) it.choices.push_back(vec());
      if (coarse) it.choices.back() = it.choices.front();
      it.answer = uniform_index(rng, c);
      oracle::Rows ch;
      for (const auto& x : it.choices) ch.emplace_back(x.begin(), x.end());
      const std::vector<double> qd(it.query.begin(), it.query.end());
      oracle_hits.push_back(oracle::mcq_choice(qd, ch) == it.answer ? 1.0 : 0.0);
      items.push_back(std::move(it));
    }
    mismatches += mcq_accuracy(items) != oracle::mean(oracle_hits);
  }

  // Chance level of the two-way protocol under random scores.
  double bin_total = 0.0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    RetrievalTask task{Direction::v2t, Split::chiral, {"pos", "neg"}, {{"q", {0, 1}, {0}}}};
    SimilarityMatrix sims{1, 2, {uniform_unit(rng), uniform_unit(rng)}};
    bin_total += binary_accuracy(sims, task);
  }
  const double bin_chance = bin_total / trials;

  const std::size_t m = 10;
  RetrievalTask task;
  for (std::size_t i = 0; i < m; ++i) task.gallery.push_back(fmt::format("g{}", i));
  std::vector<std::size_t> all(m);
  std::iota(all.begin(), all.end(), 0);
  for (int t = 0; t < trials; ++t) task.queries.push_back({fmt::format("q{}", t), all, {0}});
  SimilarityMatrix sims{static_cast<std::size_t>(trials), m, std::vector<double>(trials * m)};
  for (auto& v : sims.values) v = uniform_unit(rng);
  const double r1 = recall_at_k(sims, task, 1);
  const double p = 1.0 / m;
  const double sigma = std::sqrt(p * (1 - p) / trials);

  const bool pass = mismatches == 0 && std::abs(bin_chance - 0.5) <= 0.02 && std::abs(r1 - p) <= 3 * sigma;
  return {pass, fmt::format("200 instances, {} oracle mismatches; random binary acc {:.4f} (0.50 +/- 0.02); "
                            "random R@1 on {} candidates {:.4f} ({:.4f} +/- {:.4f})",
                            mismatches, bin_chance, m, r1, p, 3 * sigma)};
}

std::vector<Triplet> synthetic_pool(std::size_t count, TripletKind kind) {
  std::vector<Triplet> out;
  for (std::size_t i = 0; i < count; ++i) {
    Triplet t{fmt::format("{}-a{}", to_string(kind), i), fmt::format("{}-p{}", to_string(kind), i),
              fmt::format("{}-n{}", to_string(kind), i), kind, std::nullopt};
    if (kind == TripletKind::temporal) t.pair_id = static_cast<int>(i % 35) + 1;
    out.push_back(std::move(t));
  }
  return out;
}

Outcome composition_exactness() {
  const auto st = synthetic_pool(12000, TripletKind::static_bias);
  const auto te = synthetic_pool(12000, TripletKind::temporal);
  auto counts = [](const TripletDataset& ds) {
    std::size_t s = 0, t = 0;
    for (const auto& x : ds.triplets) (x.kind == TripletKind::temporal ? t : s)++;
    return std::pair{s, t};
  };
  const auto main = compose(st, te, 10000, 0.1, 17);
  const auto [s1, t1] = counts(main);
  const auto zero = compose(st, te, 10000, 0.0, 17);
  const auto one = compose(st, te, 10000, 1.0, 17);
  const auto [s0, t0] = counts(zero);
  const auto [sa, ta] = counts(one);

  const auto dir = scratch("compose");
  io::write_atomic(dir / "static.jsonl", serialize_triplets(st));
  io::write_atomic(dir / "temporal.jsonl", serialize_triplets(te));
  auto cli = [&](const std::string& out) {
    return run_cli({"compose", "--static", (dir / "static.jsonl").string(), "--temporal",
                    (dir / "temporal.jsonl").string(), "--n", "10000", "--alpha", "0.1", "--seed", "17", "--out",
                    (dir / out).string()});
  };
  const bool cli_ok = cli("x.jsonl") == 0 && cli("y.jsonl") == 0;
  const bool bytes_equal = cli_ok && slurp(dir / "x.jsonl") == slurp(dir / "y.jsonl") &&
                           serialize_dataset(main) == serialize_dataset(compose(st, te, 10000, 0.1, 17));
  const bool pass = s1 == 9000 && t1 == 1000 && main.n_static == 9000 && main.n_temporal == 1000 && s0 == 10000 &&
                    t0 == 0 && sa == 0 && ta == 10000 && bytes_equal;
  return {pass, fmt::format("alpha=0.1: {}/{}; alpha=0: {}/{}; alpha=1: {}/{}; same seed byte-identical: {}", s1, t1,
                            s0, t0, sa, ta, bytes_equal ? "yes" : "no")};
}

Outcome mining_golden() {
  const auto dir = scratch("mine");
  const auto out = dir / "mined.jsonl";
  const int rc = run_cli({"mine", "--corpus", (kSource / "data/fixture_corpus.jsonl").string(), "--lexicon",
                          (kSource / "data/chiral_lexicon.jsonl").string(), "--lemmas",
                          (kSource / "data/lemmas.tsv").string(), "--rewriter", "template", "--out", out.string()});
  if (rc != 0) return {false, fmt::format("mine exited with {}", rc)};
  const auto got = slurp(out);
  const auto golden = slurp(kSource / "tests/fixtures/mined_golden.jsonl");
  const std::size_t pairs = load_lexicon(kSource / "data/chiral_lexicon.jsonl").size();
  const std::size_t captions = load_corpus(kSource / "data/fixture_corpus.jsonl").size();

  bool exemplar = false, none_case = true;
  io::for_each_jsonl(out, [&](std::size_t, const io::json& o) {
    if (o["text"] == "The lady closes the container with its cover." &&
        o["antonym"] == "The lady opens the container with its cover.") {
      exemplar = true;
    }
    if (o["text"].get<std::string>().find("checks the cloth") != std::string::npos) none_case = false;
  });
  const bool pass = got == golden && pairs >= 35 && captions == 50 && exemplar && none_case;
  return {pass, fmt::format("{} captions, {} lexicon pairs; golden bit-exact: {}; container exemplar: {}; "
                            "'checks the cloth' absent: {}",
                            captions, pairs, got == golden ? "yes" : "no", exemplar ? "yes" : "no",
                            none_case ? "yes" : "no")};
}

// Synthetic chiral world. Coordinates 0-7 hold one temporal direction per pair,
// 8-15 one nuisance direction per pair, 16-31 the scene context. The two
// captions of a pair differ slightly along the temporal direction and, with
// opposite signs, along the nuisance direction; videos carry the temporal
// signal plus a fixed nuisance component, so the base similarity prefers the
// same caption for both sides of a pair.
struct ChiralWorld {
  static constexpr std::size_t kPairs = 8, kDim = 32, kVideosPerSide = 19;
  static constexpr double kEps = 0.1, kGamma = 0.1, kMu = 0.3;
  std::vector<std::vector<double>> context;
  std::vector<int> nuisance_sign;
  Rng rng{2024};

  ChiralWorld() {
    for (std::size_t k = 0; k < kPairs; ++k) {
      std::vector<double> c(kDim, 0.0);
      for (std::size_t i = 16; i < kDim; ++i) c[i] = standard_normal(rng);
      const double n = std::sqrt(oracle::dotp(c, c));
      for (auto& v : c) v /= n;
      context.push_back(c);
      nuisance_sign.push_back(uniform_index(rng, 2) ? 1 : -1);
    }
  }

  std::vector<double> caption(std::size_t k, int side, double nuisance, double noise) {
    auto x = context[k];
    x[k] += side * kEps;
    x[8 + k] += nuisance;
    for (std::size_t i = 16; i < kDim; ++i) x[i] += noise * standard_normal(rng);
    return x;
  }

  std::vector<double> video(std::size_t k, int side) {
    auto x = context[k];
    x[k] += side * kEps;
    x[8 + k] += nuisance_sign[k] * kMu;
    for (std::size_t i = 0; i < 16; ++i) x[i] += 0.01 * standard_normal(rng);
    for (std::size_t i = 16; i < kDim; ++i) x[i] += 0.05 * standard_normal(rng);
    return x;
  }
};

struct ChiralEval {
  double binary = 0, non_chiral_r1 = 0, min_side_cosine = 1;
};

ChiralEval evaluate_world(const std::vector<LabeledItem>& items, const EmbeddingMatrix& video,
                          const EmbeddingMatrix& text) {
  const auto splits = build_splits(items, Direction::v2t);
  const auto& chiral = splits.tasks.at(Split::chiral);
  const auto& non_chiral = splits.tasks.at(Split::non_chiral);
  ChiralEval e;
  e.binary = binary_accuracy(sim_matrix(video.select(chiral.query_ids()), text.select(chiral.gallery)), chiral);
  e.non_chiral_r1 =
      recall_at_k(sim_matrix(video.select(non_chiral.query_ids()), text.select(non_chiral.gallery)), non_chiral, 1);
  for (std::size_t k = 0; k < ChiralWorld::kPairs; ++k) {
    const auto a = text.row(std::string_view(fmt::format("t_p{}_a", k)));
    const auto b = text.row(std::string_view(fmt::format("t_p{}_b", k)));
    e.min_side_cosine = std::min(e.min_side_cosine, dot(a, b));
  }
  return e;
}

Outcome end_to_end() {
  const auto t0 = Clock::now();
  ChiralWorld world;
  using W = ChiralWorld;

  // Evaluation set: per pair, one caption and 19 videos per side (40 items).
  std::vector<LabeledItem> items;
  std::vector<std::string> vid_ids, txt_ids;
  std::vector<std::vector<double>> vid_rows, txt_rows;
  for (std::size_t k = 0; k < W::kPairs; ++k) {
    for (int side : {1, -1}) {
      const std::string s = side > 0 ? "a" : "b";
      const std::string label = fmt::format("p{}_{}", k, s);
      txt_ids.push_back(fmt::format("t_{}", label));
      txt_rows.push_back(world.caption(k, side, side * world.nuisance_sign[k] * W::kGamma, 0.0));
      items.push_back({txt_ids.back(), ItemKind::text, label, static_cast<int>(k), parse_side(s)});
      for (std::size_t v = 0; v < W::kVideosPerSide; ++v) {
        vid_ids.push_back(fmt::format("v_{}_{}", label, v));
        vid_rows.push_back(world.video(k, side));
        items.push_back({vid_ids.back(), ItemKind::video, label, static_cast<int>(k), parse_side(s)});
      }
    }
  }
  const auto video = unit_rows(vid_ids, vid_rows);
  const auto text = unit_rows(txt_ids, txt_rows);
  const auto before = evaluate_world(items, video, text);

  // Training sentences: disjoint from the evaluation captions, random nuisance sign.
  const std::size_t per_side = 30;
  std::vector<std::string> sent_ids;
  std::vector<std::vector<double>> sent_rows;
  auto sid = [](std::size_t k, int side, std::size_t m) { return fmt::format("s_p{}_{}_{}", k, side > 0 ? "a" : "b", m); };
  for (std::size_t k = 0; k < W::kPairs; ++k) {
    for (int side : {1, -1}) {
      for (std::size_t m = 0; m < per_side; ++m) {
        sent_ids.push_back(sid(k, side, m));
        const double nuisance = (uniform_index(world.rng, 2) ? 1.0 : -1.0) * W::kGamma;
        sent_rows.push_back(world.caption(k, side, nuisance, 0.03));
      }
    }
  }
  const auto base = unit_rows(sent_ids, sent_rows);

  Rng rng(99);
  std::vector<Triplet> st, te;
  for (std::size_t i = 0; i < 1500; ++i) {
    const auto k = uniform_index(rng, W::kPairs);
    const int side = uniform_index(rng, 2) ? 1 : -1;
    const auto m = uniform_index(rng, per_side);
    auto other = (m + 1 + uniform_index(rng, per_side - 1)) % per_side;
    const auto j = (k + 1 + uniform_index(rng, W::kPairs - 1)) % W::kPairs;
    st.push_back({sid(k, side, m), sid(k, side, other), sid(j, uniform_index(rng, 2) ? 1 : -1, uniform_index(rng, per_side)),
                  TripletKind::static_bias, std::nullopt});
    other = (m + 1 + uniform_index(rng, per_side - 1)) % per_side;
    te.push_back({sid(k, side, m), sid(k, side, other), sid(k, -side, m), TripletKind::temporal,
                  static_cast<int>(k) + 1});
  }

  const auto dir = scratch("e2e");
  io::write_atomic(dir / "static.jsonl", serialize_triplets(st));
  io::write_atomic(dir / "temporal.jsonl", serialize_triplets(te));
  write_embeddings(base, dir / "base.emb");
  int rc = run_cli({"compose", "--static", (dir / "static.jsonl").string(), "--temporal",
                    (dir / "temporal.jsonl").string(), "--n", "2000", "--alpha", "0.5", "--seed", "5", "--out",
                    (dir / "dataset.jsonl").string()});
  if (rc == 0) {
    rc = run_cli({"--threads", "1", "train", "--dataset", (dir / "dataset.jsonl").string(), "--embeddings",
                  (dir / "base.emb").string(), "--epochs", "2", "--batch", "32", "--lr", "0.05", "--tau", "0.05",
                  "--seed", "5", "--out", (dir / "adapter.json").string()});
  }
  if (rc != 0) return {false, fmt::format("cli exited with {}", rc)};
  const auto adapter = load_adapter(dir / "adapter.json");
  const auto after = evaluate_world(items, forward(adapter.params, video), forward(adapter.params, text));
  const double secs = seconds_since(t0);

  const bool pass = before.min_side_cosine >= 0.95 && before.binary <= 0.60 && after.binary >= 0.95 &&
                    after.non_chiral_r1 >= before.non_chiral_r1 - 0.02 && secs < 60.0;
  return {pass, fmt::format("side cosine >= {:.3f} (>= 0.95); chiral binary acc {:.3f} (<= 0.60) -> {:.3f} (>= 0.95); "
                            "non-chiral R@1 {:.3f} -> {:.3f} (drop <= 0.02); {:.2f}s (< 60s)",
                            before.min_side_cosine, before.binary, after.binary, before.non_chiral_r1,
                            after.non_chiral_r1, secs)};
}

// Paired points on the sphere whose modality centroids sit at -d/2 and +d/2
// along the first axis; the transverse parts cancel exactly.
std::pair<EmbeddingMatrix, EmbeddingMatrix> gap_world(double d, std::size_t pairs, std::size_t dim) {
  Rng rng(31);
  std::vector<std::string> vid_ids, txt_ids;
  std::vector<float> vid, txt;
  const double vc = d / 2, tc = -d / 2;
  for (std::size_t i = 0; i < pairs; ++i) {
    std::vector<double> w(dim, 0.0);
    for (std::size_t k = 1; k < dim; ++k) w[k] = standard_normal(rng);
    const double n = std::sqrt(oracle::dotp(w, w));
    for (int sign : {1, -1}) {
      vid_ids.push_back(fmt::format("v{}{}", i, sign > 0 ? "+" : "-"));
      txt_ids.push_back(fmt::format("t{}{}", i, sign > 0 ? "+" : "-"));
      vid.push_back(static_cast<float>(vc));
      txt.push_back(static_cast<float>(tc));
      for (std::size_t k = 1; k < dim; ++k) {
        vid.push_back(static_cast<float>(sign * w[k] / n * std::sqrt(1 - vc * vc)));
        txt.push_back(static_cast<float>(sign * w[k] / n * std::sqrt(1 - tc * tc)));
      }
    }
  }
  return {EmbeddingMatrix(vid_ids, dim, vid, true), EmbeddingMatrix(txt_ids, dim, txt, true)};
}

Outcome modality_gap_property() {
  double worst = 0.0;
  for (double d : {0.0, 0.3, 1.0}) {
    const auto [v, t] = gap_world(d, 50, 16);
    worst = std::max(worst, std::abs(modality_gap(v, t) - d));
  }
  std::string trained;
  bool decreased = true;
  for (double d : {0.3, 1.0}) {
    const auto [v, t] = gap_world(d, 50, 16);
    std::vector<std::string> ids = v.ids();
    ids.insert(ids.end(), t.ids().begin(), t.ids().end());
    std::vector<float> data = v.data();
    data.insert(data.end(), t.data().begin(), t.data().end());
    const EmbeddingMatrix base(ids, v.dim(), data, true);
    TripletDataset ds;
    for (std::size_t i = 0; i < v.rows(); ++i) {
      const auto j = (i + 1 + i % 7) % v.rows();
      ds.triplets.push_back({v.ids()[i], t.ids()[i], t.ids()[j], TripletKind::static_bias, std::nullopt});
    }
    ds.n_static = ds.triplets.size();
    TrainConfig c;
    c.batch = 20;
    c.epochs = 5;
    c.lr = 0.01;
    const auto result = train(ds, base, c);
    const double after = modality_gap(forward(result.params, v), forward(result.params, t));
    decreased = decreased && after < modality_gap(v, t);
    trained += fmt::format(" d={}: {:.4f} -> {:.4f};", d, modality_gap(v, t), after);
  }
  return {worst <= 1e-6 && decreased,
          fmt::format("planted d in {{0, 0.3, 1.0}}: max |gap - d| {:.2e} (<= 1e-6); after training:{}", worst, trained)};
}

Outcome format_portability() {
  Rng rng(3);
  const std::size_t rows = 17, dim = 9;
  std::vector<std::string> ids;
  std::vector<float> data;
  for (std::size_t i = 0; i < rows; ++i) ids.push_back(fmt::format("row-{}", i));
  for (std::size_t i = 0; i < rows * dim; ++i) data.push_back(static_cast<float>(standard_normal(rng)));
  data[0] = -0.0f;
  data[1] = 1e-40f;  // subnormal
  const EmbeddingMatrix m(ids, dim, data);
  const auto dir = scratch("embfile");
  write_embeddings(m, dir / "m.emb");
  const auto back = read_embeddings(dir / "m.emb");
  const auto bytes = slurp(dir / "m.emb");
  bool roundtrip = back == m && bytes.size() == 24 + rows * dim * 4;
  for (std::size_t i = 0; i < data.size(); ++i) {
    roundtrip = roundtrip && std::bit_cast<std::uint32_t>(back.data()[i]) == std::bit_cast<std::uint32_t>(data[i]);
  }
  const EmbeddingMatrix small({"x", "y"}, 3, {1, 2, 3, 4, 5, 6});
  const bool size_ok = encode_embeddings(small).size() == 48;

  const auto cross = read_embeddings(kSource / "tests/fixtures/cross.emb");
  const auto expected = io::json::parse(slurp(kSource / "tests/fixtures/cross_expected.json"));
  bool cross_ok = cross.ids() == expected["ids"].get<std::vector<std::string>>() && cross.dim() == expected["dim"] &&
                  cross.normalized() == expected["normalized"].get<bool>();
  const auto bits = expected["bits"].get<std::vector<std::vector<std::uint32_t>>>();
  cross_ok = cross_ok && cross.rows() == bits.size();
  for (std::size_t i = 0; cross_ok && i < bits.size(); ++i) {
    for (std::size_t j = 0; j < bits[i].size(); ++j) {
      cross_ok = cross_ok && std::bit_cast<std::uint32_t>(cross.row(i)[j]) == bits[i][j];
    }
  }
  return {roundtrip && size_ok && cross_ok,
          fmt::format("{}x{} roundtrip bit-exact: {}; 2x3 file is 48 bytes: {}; cross-implementation fixture: {}", rows,
                      dim, roundtrip ? "yes" : "no", size_ok ? "yes" : "no", cross_ok ? "yes" : "no")};
}

Outcome split_goldens() {
  const auto items = load_items(kSource / "tests/fixtures/splits/items.jsonl");
  std::size_t matched = 0, checked = 0;
  bool structural = true;
  std::map<std::string, const LabeledItem*> by_id;
  for (const auto& it : items) by_id[it.id] = &it;
  for (auto dir : {Direction::t2v, Direction::v2t}) {
    const auto splits = build_splits(items, dir);
    for (const auto& [split, task] : splits.tasks) {
      ++checked;
      const auto path = kSource / fmt::format("tests/fixtures/splits/{}_{}.json", to_string(dir), to_string(split));
      matched += to_json(task) == io::json::parse(slurp(path));
      for (const auto& q : task.queries) {
        const auto& qi = *by_id.at(q.id);
        if (split == Split::all) structural = structural && q.candidates.size() == task.gallery.size();
        for (auto c : q.candidates) {
          const auto& g = *by_id.at(task.gallery[c]);
          const bool opposite_side = g.pair_id == qi.pair_id && g.side != qi.side;
          if (split == Split::chiral) structural = structural && (g.class_label == qi.class_label || opposite_side);
          if (split == Split::non_chiral) structural = structural && !opposite_side;
        }
      }
    }
  }
  return {matched == checked && checked == 6 && structural,
          fmt::format("{}/{} tasks match golden files; gallery rules hold: {}", matched, checked,
                      structural ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient correctness", gradient_correctness},
      {"loss oracle equivalence", loss_oracle},
      {"metric oracles", metric_oracles},
      {"composition exactness", composition_exactness},
      {"mining golden files", mining_golden},
      {"end-to-end synthetic chiral effect", end_to_end},
      {"modality-gap property", modality_gap_property},
      {"format portability", format_portability},
      {"split-builder correctness", split_goldens},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, fmt::format("threw: {}", e.what())};
    }
    failures += !o.pass;
    std::cout << fmt::format("{} {}: {}", o.pass ? "PASS" : "FAIL", name, o.detail) << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
