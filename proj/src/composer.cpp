// Copyright (c) 2026, The tara-toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
#include "tara/composer.hpp"

#include <cmath>

#include <fmt/format.h>

#include "tara/error.hpp"
#include "tara/io.hpp"

namespace tara {

std::string_view to_string(TripletKind k) { return k == TripletKind::temporal ? "temporal" : "static"; }

TripletKind parse_triplet_kind(std::string_view s) {
  if (s == "static") return TripletKind::static_bias;
  if (s == "temporal") return TripletKind::temporal;
  throw Error(fmt::format("unknown triplet kind '{}'", s));
}

void validate(const Triplet& t) {
  if (t.anchor.empty() || t.positive.empty() || t.negative.empty()) throw Error("triplet has an empty sentence");
  if (t.anchor == t.positive || t.anchor == t.negative || t.positive == t.negative) {
    throw Error(fmt::format("triplet sentences are not pairwise distinct: '{}'", t.anchor));
  }
  if ((t.kind == TripletKind::temporal) != t.pair_id.has_value()) {
    throw Error(fmt::format("triplet '{}': pair_id must be present iff kind is temporal", t.anchor));
  }
}

VerbObjectIndex::VerbObjectIndex(const std::vector<MinedRecord>& pool) : pool_(&pool) {
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& m = pool[i].mined;
    buckets_[{m.vo.pair_id, m.vo.side, m.vo.object}].push_back(m.caption.id);
    if (!by_id_.emplace(m.caption.id, i).second) {
      throw Error(fmt::format("duplicate id '{}' in mined pool", m.caption.id));
    }
  }
}

const std::vector<std::string>& VerbObjectIndex::ids(const Key& key) const {
  static const std::vector<std::string> kNone;
  auto it = buckets_.find(key);
  return it == buckets_.end() ? kNone : it->second;
}

const MinedRecord& VerbObjectIndex::record(std::string_view id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw Error(fmt::format("id '{}' is not in the mined pool", id));
  return (*pool_)[it->second];
}

std::vector<std::string> find_positives(const MinedCaption& target, const VerbObjectIndex& index) {
  std::vector<std::string> out;
  for (const auto& id : index.ids({target.vo.pair_id, target.vo.side, target.vo.object})) {
    if (id != target.caption.id) out.push_back(id);
  }
  return out;
}

std::vector<Triplet> build_temporal_triplets(const std::vector<MinedRecord>& mined, const VerbObjectIndex& index,
                                             const std::vector<std::string>& subject_pool, Rng& rng,
                                             TemporalBuildStats* stats) {
  TemporalBuildStats local;
  std::vector<Triplet> out;
  for (const auto& rec : mined) {
    if (!rec.rewrite.antonym) {
      ++local.skipped_no_antonym;
      continue;
    }
    const auto& anchor = rec.mined.caption.text;
    std::vector<std::string> positives;
    for (const auto& id : find_positives(rec.mined, index)) {
      const auto& text = index.record(id).mined.caption.text;
      if (text != anchor && text != *rec.rewrite.antonym) positives.push_back(text);
    }
    if (positives.empty()) {
      ++local.skipped_no_positive;
      continue;
    }
    const auto& positive = positives[uniform_index(rng, positives.size())];
    auto texts = replace_subjects({anchor, positive, *rec.rewrite.antonym}, subject_pool, rng);
    Triplet t{std::move(texts[0]), std::move(texts[1]), std::move(texts[2]), TripletKind::temporal,
              rec.mined.vo.pair_id};
    validate(t);
    out.push_back(std::move(t));
    ++local.built;
  }
  if (stats) *stats = local;
  return out;
}

std::size_t temporal_count(std::size_t n, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(fmt::format("alpha {} outside [0, 1]", alpha));
  const double x = alpha * static_cast<double>(n);
  const double fl = std::floor(x);
  const double frac = x - fl;
  double r = fl;
  if (frac > 0.5 || (frac == 0.5 && std::fmod(fl, 2.0) != 0.0)) r = fl + 1.0;
  return static_cast<std::size_t>(r);
}

TripletDataset compose(const std::vector<Triplet>& static_pool, const std::vector<Triplet>& temporal_pool,
                       std::size_t n, double alpha, std::uint64_t seed) {
  const std::size_t n_temporal = temporal_count(n, alpha);
  const std::size_t n_static = n - n_temporal;
  if (static_pool.size() < n_static) {
    throw Error(fmt::format("static pool has {} triplets but {} are required", static_pool.size(), n_static));
  }
  if (temporal_pool.size() < n_temporal) {
    throw Error(fmt::format("temporal pool has {} triplets but {} are required", temporal_pool.size(),
                            n_temporal));
  }
  Rng rng(seed);
  TripletDataset ds;
  ds.seed = seed;
  ds.alpha = alpha;
  ds.n_static = n_static;
  ds.n_temporal = n_temporal;
  ds.triplets.reserve(n);
  for (auto i : sample_without_replacement(static_pool.size(), n_static, rng)) {
    ds.triplets.push_back(static_pool[i]);
  }
  for (auto i : sample_without_replacement(temporal_pool.size(), n_temporal, rng)) {
    ds.triplets.push_back(temporal_pool[i]);
  }
  shuffle(ds.triplets, rng);
  return ds;
}

namespace {

io::json to_json(const Triplet& t) {
  io::json j;
  j["anchor"] = t.anchor;
  j["positive"] = t.positive;
  j["negative"] = t.negative;
  j["kind"] = std::string(to_string(t.kind));
  j["pair_id"] = t.pair_id ? io::json(*t.pair_id) : io::json(nullptr);
  return j;
}

Triplet triplet_from_json(const io::json& j) {
  Triplet t;
  t.anchor = j.at("anchor").get<std::string>();
  t.positive = j.at("positive").get<std::string>();
  t.negative = j.at("negative").get<std::string>();
  t.kind = parse_triplet_kind(j.at("kind").get<std::string>());
  if (j.contains("pair_id") && !j.at("pair_id").is_null()) t.pair_id = j.at("pair_id").get<int>();
  validate(t);
  return t;
}

bool is_header(const io::json& j) { return j.contains("n_static") && !j.contains("anchor"); }

}  // namespace

std::string serialize_triplets(const std::vector<Triplet>& triplets) {
  std::string out;
  for (const auto& t : triplets) {
    out += io::to_line(to_json(t));
    out += '\n';
  }
  return out;
}

std::string serialize_dataset(const TripletDataset& ds) {
  io::json header;
  header["n_static"] = ds.n_static;
  header["n_temporal"] = ds.n_temporal;
  header["alpha"] = ds.alpha;
  header["seed"] = ds.seed;
  return io::to_line(header) + '\n' + serialize_triplets(ds.triplets);
}

std::vector<Triplet> load_triplets(const std::filesystem::path& path) {
  std::vector<Triplet> out;
  io::for_each_jsonl(path, [&](std::size_t line, const io::json& obj) {
    if (is_header(obj)) return;
    try {
      out.push_back(triplet_from_json(obj));
    } catch (const Error& e) {
      throw Error(fmt::format("{}:{}: {}", path.string(), line, e.what()));
    }
  });
  return out;
}

TripletDataset load_dataset(const std::filesystem::path& path) {
  TripletDataset ds;
  bool header_seen = false;
  io::for_each_jsonl(path, [&](std::size_t line, const io::json& obj) {
    if (!header_seen) {
      if (!is_header(obj)) throw Error(fmt::format("{}:{}: missing dataset header", path.string(), line));
      ds.n_static = obj.at("n_static").get<std::size_t>();
      ds.n_temporal = obj.at("n_temporal").get<std::size_t>();
      ds.alpha = obj.at("alpha").get<double>();
      ds.seed = obj.at("seed").get<std::uint64_t>();
      header_seen = true;
      return;
    }
    try {
      ds.triplets.push_back(triplet_from_json(obj));
    } catch (const Error& e) {
      throw Error(fmt::format("{}:{}: {}", path.string(), line, e.what()));
    }
  });
  if (!header_seen) throw Error(fmt::format("{}: missing dataset header", path.string()));
  std::size_t temporal = 0;
  for (const auto& t : ds.triplets) temporal += t.kind == TripletKind::temporal;
  if (temporal != ds.n_temporal || ds.triplets.size() - temporal != ds.n_static) {
    throw Error(fmt::format("{}: header counts ({} static, {} temporal) disagree with contents", path.string(),
                            ds.n_static, ds.n_temporal));
  }
  return ds;
}

}  // namespace tara
