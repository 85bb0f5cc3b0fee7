// Copyright (c) 2026, The tara-toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
#include "tara/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "tara/error.hpp"

namespace tara {

std::string_view to_string(ItemKind k) { return k == ItemKind::video ? "video" : "text"; }
std::string_view to_string(Direction d) { return d == Direction::t2v ? "t2v" : "v2t"; }
std::string_view to_string(Split s) {
  switch (s) {
    case Split::chiral: return "chiral";
    case Split::non_chiral: return "non_chiral";
    case Split::all: return "all";
  }
  return "all";
}

ItemKind parse_item_kind(std::string_view s) {
  if (s == "video") return ItemKind::video;
  if (s == "text") return ItemKind::text;
  throw Error(fmt::format("unknown item kind '{}'", s));
}

Direction parse_direction(std::string_view s) {
  if (s == "t2v") return Direction::t2v;
  if (s == "v2t") return Direction::v2t;
  throw Error(fmt::format("unknown direction '{}'", s));
}

Split parse_split(std::string_view s) {
  if (s == "chiral") return Split::chiral;
  if (s == "non_chiral") return Split::non_chiral;
  if (s == "all") return Split::all;
  throw Error(fmt::format("unknown split '{}'", s));
}

std::vector<LabeledItem> load_items(const std::filesystem::path& path) {
  std::vector<LabeledItem> items;
  std::set<std::string> ids;
  io::for_each_jsonl(path, [&](std::size_t line, const io::json& obj) {
    LabeledItem it;
    it.id = obj.at("id").get<std::string>();
    it.kind = parse_item_kind(obj.at("kind").get<std::string>());
    it.class_label = obj.at("class_label").get<std::string>();
    if (obj.contains("pair_id") && !obj.at("pair_id").is_null()) it.pair_id = obj.at("pair_id").get<int>();
    if (obj.contains("side") && !obj.at("side").is_null()) it.side = parse_side(obj.at("side").get<std::string>());
    if (it.pair_id.has_value() != it.side.has_value()) {
      throw Error(fmt::format("{}:{}: item '{}' must set pair_id and side together", path.string(), line, it.id));
    }
    if (!ids.insert(it.id).second) throw Error(fmt::format("{}:{}: duplicate item id '{}'", path.string(), line, it.id));
    items.push_back(std::move(it));
  });
  return items;
}

std::vector<std::string> RetrievalTask::query_ids() const {
  std::vector<std::string> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(q.id);
  return out;
}

void RetrievalTask::validate() const {
  if (gallery.empty()) throw Error("retrieval gallery is empty");
  for (const auto& q : queries) {
    if (q.relevant.empty()) throw Error(fmt::format("query '{}' has no relevant candidate", q.id));
    std::set<std::size_t> cand(q.candidates.begin(), q.candidates.end());
    if (cand.size() != q.candidates.size()) throw Error(fmt::format("query '{}' repeats a candidate", q.id));
    for (auto c : q.candidates) {
      if (c >= gallery.size()) throw Error(fmt::format("query '{}' candidate {} outside the gallery", q.id, c));
    }
    for (auto r : q.relevant) {
      if (!cand.contains(r)) throw Error(fmt::format("query '{}' relevant item {} is not a candidate", q.id, r));
    }
  }
}

io::json to_json(const RetrievalTask& task) {
  io::json j;
  j["direction"] = std::string(to_string(task.direction));
  j["split"] = std::string(to_string(task.split));
  j["gallery"] = task.gallery;
  auto qs = io::json::array();
  for (const auto& q : task.queries) {
    io::json jq;
    jq["id"] = q.id;
    std::vector<std::string> cand, rel;
    for (auto c : q.candidates) cand.push_back(task.gallery[c]);
    for (auto r : q.relevant) rel.push_back(task.gallery[r]);
    jq["candidates"] = cand;
    jq["relevant"] = rel;
    qs.push_back(std::move(jq));
  }
  j["queries"] = std::move(qs);
  return j;
}

RetrievalTask task_from_json(const io::json& j) {
  RetrievalTask t;
  t.direction = parse_direction(j.at("direction").get<std::string>());
  t.split = parse_split(j.at("split").get<std::string>());
  t.gallery = j.at("gallery").get<std::vector<std::string>>();
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < t.gallery.size(); ++i) pos[t.gallery[i]] = i;
  auto index = [&](const std::string& id) {
    auto it = pos.find(id);
    if (it == pos.end()) throw Error(fmt::format("task references '{}' outside the gallery", id));
    return it->second;
  };
  for (const auto& jq : j.at("queries")) {
    RetrievalQuery q;
    q.id = jq.at("id").get<std::string>();
    for (const auto& c : jq.at("candidates")) q.candidates.push_back(index(c.get<std::string>()));
    for (const auto& r : jq.at("relevant")) q.relevant.push_back(index(r.get<std::string>()));
    t.queries.push_back(std::move(q));
  }
  t.validate();
  return t;
}

SplitSet build_splits(const std::vector<LabeledItem>& items, Direction direction) {
  if (std::none_of(items.begin(), items.end(), [](const auto& it) { return it.pair_id.has_value(); })) {
    throw Error("items contain no chiral pair");
  }
  const ItemKind query_kind = direction == Direction::t2v ? ItemKind::text : ItemKind::video;
  std::vector<const LabeledItem*> gallery_items;
  std::vector<const LabeledItem*> query_items;
  for (const auto& it : items) (it.kind == query_kind ? query_items : gallery_items).push_back(&it);

  SplitSet out;
  for (Split split : {Split::chiral, Split::non_chiral, Split::all}) {
    RetrievalTask task;
    task.direction = direction;
    task.split = split;
    for (const auto* g : gallery_items) task.gallery.push_back(g->id);
    out.tasks[split] = std::move(task);
  }

  auto is_opposite = [](const LabeledItem& q, const LabeledItem& g) {
    return q.pair_id && g.pair_id && *g.pair_id == *q.pair_id && *g.side == opposite(*q.side);
  };

  for (const auto* q : query_items) {
    bool has_opposite = false;
    for (const auto* g : gallery_items) has_opposite |= is_opposite(*q, *g);

    for (Split split : {Split::chiral, Split::non_chiral, Split::all}) {
      if (split == Split::chiral && !q->pair_id) continue;
      if (split == Split::chiral && !has_opposite) {
        out.diagnostics.push_back(fmt::format("{} {}: query '{}' (class '{}', pair {}) has no opposite-side items; dropped",
                                              to_string(direction), to_string(split), q->id, q->class_label,
                                              *q->pair_id));
        continue;
      }
      RetrievalQuery rq;
      rq.id = q->id;
      for (std::size_t gi = 0; gi < gallery_items.size(); ++gi) {
        const auto& g = *gallery_items[gi];
        const bool same_class = g.class_label == q->class_label;
        bool keep = true;
        if (split == Split::chiral) keep = same_class || is_opposite(*q, g);
        if (split == Split::non_chiral) keep = !is_opposite(*q, g);
        if (!keep) continue;
        rq.candidates.push_back(gi);
        if (same_class) rq.relevant.push_back(gi);
      }
      if (rq.relevant.empty()) {
        out.diagnostics.push_back(fmt::format("{} {}: query '{}' (class '{}') has no relevant items; dropped",
                                              to_string(direction), to_string(split), q->id, q->class_label));
        continue;
      }
      out.tasks[split].queries.push_back(std::move(rq));
    }
  }
  return out;
}

namespace {

void check_shape(const SimilarityMatrix& sims, const RetrievalTask& task) {
  if (sims.rows != task.queries.size() || sims.cols != task.gallery.size()) {
    throw Error(fmt::format("similarity matrix is {} x {} but the task has {} queries and {} gallery items", sims.rows,
                            sims.cols, task.queries.size(), task.gallery.size()));
  }
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

std::vector<std::size_t> rank_candidates(const SimilarityMatrix& sims, const RetrievalTask& task, std::size_t q) {
  auto order = task.queries[q].candidates;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const double sx = sims(q, x);
    const double sy = sims(q, y);
    if (sx != sy) return sx > sy;
    return x < y;
  });
  return order;
}

std::vector<double> recall_per_query(const SimilarityMatrix& sims, const RetrievalTask& task, std::size_t k) {
  check_shape(sims, task);
  if (k < 1 || k > task.gallery.size()) {
    throw Error(fmt::format("k = {} outside [1, {}]", k, task.gallery.size()));
  }
  std::vector<double> out;
  out.reserve(task.queries.size());
  for (std::size_t q = 0; q < task.queries.size(); ++q) {
    const auto ranked = rank_candidates(sims, task, q);
    const auto& rel = task.queries[q].relevant;
    const auto top = std::min(k, ranked.size());
    const bool hit = std::any_of(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(top),
                                 [&](std::size_t c) { return std::find(rel.begin(), rel.end(), c) != rel.end(); });
    out.push_back(hit ? 1.0 : 0.0);
  }
  return out;
}

double recall_at_k(const SimilarityMatrix& sims, const RetrievalTask& task, std::size_t k) {
  return mean(recall_per_query(sims, task, k));
}

std::vector<double> average_precision_per_query(const SimilarityMatrix& sims, const RetrievalTask& task) {
  check_shape(sims, task);
  std::vector<double> out;
  out.reserve(task.queries.size());
  for (std::size_t q = 0; q < task.queries.size(); ++q) {
    const auto ranked = rank_candidates(sims, task, q);
    const std::set<std::size_t> rel(task.queries[q].relevant.begin(), task.queries[q].relevant.end());
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t r = 0; r < ranked.size(); ++r) {
      if (!rel.contains(ranked[r])) continue;
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
    out.push_back(sum / static_cast<double>(rel.size()));
  }
  return out;
}

double mean_average_precision(const SimilarityMatrix& sims, const RetrievalTask& task) {
  return mean(average_precision_per_query(sims, task));
}

std::vector<double> binary_per_query(const SimilarityMatrix& sims, const RetrievalTask& task) {
  check_shape(sims, task);
  std::vector<double> out;
  out.reserve(task.queries.size());
  for (std::size_t q = 0; q < task.queries.size(); ++q) {
    const auto& query = task.queries[q];
    if (query.candidates.size() != 2 || query.relevant.size() != 1) {
      throw Error(fmt::format("binary accuracy needs 2 candidates and 1 relevant; query '{}' has {} and {}", query.id,
                              query.candidates.size(), query.relevant.size()));
    }
    const auto pos = query.relevant.front();
    const auto neg = query.candidates[0] == pos ? query.candidates[1] : query.candidates[0];
    const double sp = sims(q, pos);
    const double sn = sims(q, neg);
    out.push_back(sp > sn ? 1.0 : (sp == sn ? 0.5 : 0.0));
  }
  return out;
}

double binary_accuracy(const SimilarityMatrix& sims, const RetrievalTask& task) {
  return mean(binary_per_query(sims, task));
}

namespace {

double cosine(std::span<const float> x, std::span<const float> y) {
  if (x.size() != y.size()) throw Error("cosine of vectors with different dimensions");
  const double nx = std::sqrt(dot(x, x));
  const double ny = std::sqrt(dot(y, y));
  if (nx == 0.0 || ny == 0.0) throw Error("cosine of a zero vector");
  return dot(x, y) / (nx * ny);
}

}  // namespace

double mcq_accuracy(std::span<const McqItem> items) {
  if (items.empty()) throw Error("no multiple-choice items");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& it = items[i];
    if (it.choices.size() < 2) throw Error(fmt::format("item {} has fewer than 2 choices", i));
    if (it.answer >= it.choices.size()) {
      throw Error(fmt::format("item {} answer index {} out of range for {} choices", i, it.answer, it.choices.size()));
    }
    std::size_t best = 0;
    double best_sim = cosine(it.query, it.choices[0]);
    for (std::size_t c = 1; c < it.choices.size(); ++c) {
      const double s = cosine(it.query, it.choices[c]);
      if (s > best_sim) {
        best_sim = s;
        best = c;
      }
    }
    correct += best == it.answer;
  }
  return static_cast<double>(correct) / static_cast<double>(items.size());
}

RetrievalTask full_gallery_task(const EmbeddingMatrix& queries, const EmbeddingMatrix& gallery,
                                const std::vector<std::vector<std::size_t>>& relevance) {
  if (relevance.size() != queries.rows()) {
    throw Error(fmt::format("{} queries but {} relevance lists", queries.rows(), relevance.size()));
  }
  RetrievalTask task;
  task.gallery = gallery.ids();
  std::vector<std::size_t> all(gallery.rows());
  std::iota(all.begin(), all.end(), std::size_t{0});
  for (std::size_t q = 0; q < queries.rows(); ++q) {
    task.queries.push_back({queries.ids()[q], all, relevance[q]});
  }
  task.validate();
  return task;
}

NegationResult negation_eval(const EmbeddingMatrix& original, const EmbeddingMatrix& negated,
                             const EmbeddingMatrix& gallery, const std::vector<std::vector<std::size_t>>& relevance,
                             std::size_t k) {
  if (original.rows() != negated.rows()) {
    throw Error(fmt::format("unpaired query: {} original vs {} negated queries", original.rows(), negated.rows()));
  }
  const auto task_orig = full_gallery_task(original, gallery, relevance);
  auto task_neg = full_gallery_task(negated, gallery, relevance);
  NegationResult r;
  r.r_at_k = recall_at_k(sim_matrix(original, gallery), task_orig, k);
  r.r_neg_at_k = recall_at_k(sim_matrix(negated, gallery), task_neg, k);
  return r;
}

std::map<std::string, double> composed_retrieval(const EmbeddingMatrix& queries, const EmbeddingMatrix& gallery,
                                                 const std::vector<std::vector<std::size_t>>& relevance,
                                                 const std::vector<std::size_t>& ks) {
  const auto task = full_gallery_task(queries, gallery, relevance);
  const auto sims = sim_matrix(queries, gallery);
  std::map<std::string, double> out;
  for (auto k : ks) out[fmt::format("r_at_{}", k)] = recall_at_k(sims, task, k);
  return out;
}

double nearest_centroid_probe(const EmbeddingMatrix& train, const std::vector<std::string>& train_labels,
                              const EmbeddingMatrix& test, const std::vector<std::string>& test_labels) {
  if (train.rows() != train_labels.size() || test.rows() != test_labels.size()) {
    throw Error("probe labels do not match embedding rows");
  }
  if (train.dim() != test.dim()) throw Error("probe train and test dimensions differ");
  if (test.rows() == 0) throw Error("probe test set is empty");
  std::map<std::string, std::vector<double>> sums;
  for (std::size_t i = 0; i < train.rows(); ++i) {
    auto& acc = sums[train_labels[i]];
    acc.resize(train.dim(), 0.0);
    const auto r = train.row(i);
    for (std::size_t k = 0; k < train.dim(); ++k) acc[k] += r[k];
  }
  for (const auto& label : test_labels) {
    if (!sums.contains(label)) throw Error(fmt::format("class '{}' has zero training examples", label));
  }
  std::vector<std::string> labels;
  std::vector<std::vector<float>> centroids;
  for (const auto& [label, acc] : sums) {
    double sq = 0.0;
    for (double v : acc) sq += v * v;
    if (sq == 0.0) throw Error(fmt::format("class '{}' has a zero centroid", label));
    std::vector<float> c(acc.size());
    for (std::size_t k = 0; k < acc.size(); ++k) c[k] = static_cast<float>(acc[k] / std::sqrt(sq));
    labels.push_back(label);
    centroids.push_back(std::move(c));
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.rows(); ++i) {
    std::size_t best = 0;
    double best_sim = cosine(test.row(i), centroids[0]);
    for (std::size_t c = 1; c < centroids.size(); ++c) {
      const double s = cosine(test.row(i), centroids[c]);
      if (s > best_sim) {
        best_sim = s;
        best = c;
      }
    }
    correct += labels[best] == test_labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(test.rows());
}

double modality_gap(const EmbeddingMatrix& video, const EmbeddingMatrix& text) {
  if (video.rows() == 0 || text.rows() == 0) throw Error("modality gap of an empty set");
  if (video.dim() != text.dim()) throw Error("modality gap inputs have different dimensions");
  if (!video.normalized() || !text.normalized()) throw Error("modality gap requires normalized embeddings");
  auto centroid = [](const EmbeddingMatrix& m) {
    std::vector<double> c(m.dim(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const auto r = m.row(i);
      for (std::size_t k = 0; k < m.dim(); ++k) c[k] += r[k];
    }
    for (auto& v : c) v /= static_cast<double>(m.rows());
    return c;
  };
  const auto cv = centroid(video);
  const auto ct = centroid(text);
  double sq = 0.0;
  for (std::size_t k = 0; k < cv.size(); ++k) sq += (cv[k] - ct[k]) * (cv[k] - ct[k]);
  return std::sqrt(sq);
}

void validate(const EvalReport& report) {
  for (const auto& [name, value] : report.metrics) {
    const double hi = name == "modality_gap" ? 2.0 + 1e-9 : 1.0;
    if (!(value >= 0.0 && value <= hi)) {
      throw Error(fmt::format("metric {} = {} outside [0, {}]", name, value, hi));
    }
  }
}

io::json to_json(const EvalReport& report) {
  io::json j;
  j["task"] = report.task;
  j["seed"] = report.seed;
  io::json metrics = io::json::object();
  for (const auto& [k, v] : report.metrics) metrics[k] = v;
  j["metrics"] = std::move(metrics);
  io::json per_query = io::json::object();
  for (const auto& [k, v] : report.per_query) per_query[k] = v;
  j["per_query"] = std::move(per_query);
  j["query_ids"] = report.query_ids;
  return j;
}

EvalReport report_from_json(const io::json& j) {
  EvalReport r;
  r.task = j.at("task").get<std::string>();
  r.seed = j.value("seed", std::uint64_t{0});
  for (const auto& [k, v] : j.at("metrics").items()) r.metrics[k] = v.get<double>();
  if (j.contains("per_query")) {
    for (const auto& [k, v] : j.at("per_query").items()) r.per_query[k] = v.get<std::vector<double>>();
  }
  if (j.contains("query_ids")) r.query_ids = j.at("query_ids").get<std::vector<std::string>>();
  validate(r);
  return r;
}

std::string report_csv(const EvalReport& report) {
  std::string out = "task,metric,value\n";
  for (const auto& [k, v] : report.metrics) out += fmt::format("{},{},{:.6f}\n", report.task, k, v);
  return out;
}

EvalReport evaluate_retrieval(const SimilarityMatrix& sims, const RetrievalTask& task, const std::vector<std::size_t>& ks,
                              std::uint64_t seed) {
  EvalReport r;
  r.task = fmt::format("{}/{}", to_string(task.direction), to_string(task.split));
  r.seed = seed;
  r.query_ids = task.query_ids();
  for (auto k : ks) {
    auto per = recall_per_query(sims, task, k);
    const auto name = fmt::format("r_at_{}", k);
    r.metrics[name] = mean(per);
    r.per_query[name] = std::move(per);
  }
  auto ap = average_precision_per_query(sims, task);
  r.metrics["map"] = mean(ap);
  r.per_query["map"] = std::move(ap);
  const bool two_way = !task.queries.empty() && std::all_of(task.queries.begin(), task.queries.end(), [](const auto& q) {
    return q.candidates.size() == 2 && q.relevant.size() == 1;
  });
  if (two_way) {
    auto b = binary_per_query(sims, task);
    r.metrics["binary_acc"] = mean(b);
    r.per_query["binary_acc"] = std::move(b);
  }
  validate(r);
  return r;
}

}  // namespace tara
