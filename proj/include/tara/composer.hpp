// Copyright (c) 2026, The tara-toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Triplet construction and static/temporal dataset composition.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "tara/miner.hpp"
#include "tara/rng.hpp"

namespace tara {

enum class TripletKind { static_bias, temporal };

std::string_view to_string(TripletKind k);
TripletKind parse_triplet_kind(std::string_view s);

struct Triplet {
  std::string anchor;
  std::string positive;
  std::string negative;
  TripletKind kind = TripletKind::static_bias;
  std::optional<int> pair_id;  // present iff temporal

  bool operator==(const Triplet&) const = default;
};

/// Throws tara::Error when sentences are empty or repeated, or when pair_id
/// presence disagrees with kind.
void validate(const Triplet& t);

struct TripletDataset {
  std::vector<Triplet> triplets;
  std::size_t n_static = 0;
  std::size_t n_temporal = 0;
  std::uint64_t seed = 0;
  double alpha = 0.0;
};

/// (pair_id, side, object lemma) buckets over a mined pool.
class VerbObjectIndex {
 public:
  using Key = std::tuple<int, Side, std::string>;

  explicit VerbObjectIndex(const std::vector<MinedRecord>& pool);

  const std::vector<std::string>& ids(const Key& key) const;
  const MinedRecord& record(std::string_view id) const;

 private:
  const std::vector<MinedRecord>* pool_;
  std::map<Key, std::vector<std::string>> buckets_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
};

/// Other captions sharing the target's (pair_id, side, object), in pool order.
std::vector<std::string> find_positives(const MinedCaption& target, const VerbObjectIndex& index);

struct TemporalBuildStats {
  std::size_t built = 0;
  std::size_t skipped_no_positive = 0;
  std::size_t skipped_no_antonym = 0;
};

/// (anchor, sampled positive, anchor antonym) per anchor with at least one
/// positive, subjects replaced jointly.
std::vector<Triplet> build_temporal_triplets(const std::vector<MinedRecord>& mined, const VerbObjectIndex& index,
                                             const std::vector<std::string>& subject_pool, Rng& rng,
                                             TemporalBuildStats* stats = nullptr);

/// round(alpha * n) with ties to even.
std::size_t temporal_count(std::size_t n, double alpha);

/// Samples n - round(alpha n) static and round(alpha n) temporal triplets
/// without replacement, then shuffles the union.
TripletDataset compose(const std::vector<Triplet>& static_pool, const std::vector<Triplet>& temporal_pool,
                       std::size_t n, double alpha, std::uint64_t seed);

/// Header line {"n_static","n_temporal","alpha","seed"} then one triplet per line.
std::string serialize_dataset(const TripletDataset& ds);
TripletDataset load_dataset(const std::filesystem::path& path);

/// Triplet lines with or without a leading dataset header.
std::vector<Triplet> load_triplets(const std::filesystem::path& path);
std::string serialize_triplets(const std::vector<Triplet>& triplets);

}  // namespace tara
