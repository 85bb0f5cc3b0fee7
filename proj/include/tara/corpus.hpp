// Copyright (c) 2026, The tara-toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Caption corpora and chiral verb lexicons.
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tara {

enum class Source { nli, ego4d, other };

std::string_view to_string(Source s);
Source parse_source(std::string_view s);

/// True iff text carries an anonymized subject token ("#C C" or "#O").
bool has_placeholder(std::string_view text);

struct Caption {
  std::string id;
  std::string text;
  Source source = Source::other;
  bool has_placeholder = false;
};

/// Immutable, id-unique list of captions in file order.
class CaptionCorpus {
 public:
  CaptionCorpus() = default;
  /// Validates ids and texts; throws tara::Error on the first violation.
  explicit CaptionCorpus(std::vector<Caption> captions);

  const std::vector<Caption>& captions() const { return captions_; }
  std::size_t size() const { return captions_.size(); }
  const Caption* find(std::string_view id) const;

  auto begin() const { return captions_.begin(); }
  auto end() const { return captions_.end(); }

 private:
  std::vector<Caption> captions_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

CaptionCorpus load_corpus(const std::filesystem::path& path);
/// Inverse of load_corpus: one {"id","text","source"} object per line.
std::string serialize_corpus(const CaptionCorpus& corpus);

enum class Side { a, b };

inline Side opposite(Side s) { return s == Side::a ? Side::b : Side::a; }
std::string_view to_string(Side s);
Side parse_side(std::string_view s);

struct ChiralPair {
  int pair_id = 0;
  std::vector<std::string> side_a;
  std::vector<std::string> side_b;

  const std::vector<std::string>& forms(Side s) const { return s == Side::a ? side_a : side_b; }
};

struct LexiconEntry {
  int pair_id;
  Side side;
};

/// Lowercases ASCII and collapses runs of whitespace to one space.
std::string normalize_form(std::string_view form);

class ChiralLexicon {
 public:
  ChiralLexicon() = default;
  /// Normalizes forms and enforces: non-empty sides, unique pair ids, and no
  /// form shared between pairs or sides.
  explicit ChiralLexicon(std::vector<ChiralPair> pairs);

  const std::vector<ChiralPair>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }

  std::optional<LexiconEntry> lookup(std::string_view form) const;
  const ChiralPair& pair(int pair_id) const;

 private:
  std::vector<ChiralPair> pairs_;
  std::unordered_map<std::string, LexiconEntry> by_form_;
  std::unordered_map<int, std::size_t> by_id_;
};

ChiralLexicon load_lexicon(const std::filesystem::path& path);

}  // namespace tara
