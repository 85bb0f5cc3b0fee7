// Copyright (c) 2026, The tara-toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Chiral verb mining, temporal antonym rewriting and subject replacement.
#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tara/corpus.hpp"
#include "tara/rng.hpp"
#include "tara/text.hpp"

namespace tara {

class LlmClient;

struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool operator==(const CharSpan&) const = default;
};

/// A lexicon verb phrase located in a caption.
///
/// Forms may contain one '*' slot ("puts * down"); the slot matches one to
/// four words and its text is carried into the antonym. For slotted forms
/// `span` covers the whole phrase and the object is taken from inside the
/// slot.
struct VerbObject {
  std::string verb_form;
  int pair_id = 0;
  Side side = Side::a;
  std::string object;
  CharSpan span;
  std::optional<CharSpan> slot;
};

struct MinedCaption {
  Caption caption;
  VerbObject vo;
};

enum class Rewriter { template_rules, external };

std::string_view to_string(Rewriter r);
Rewriter parse_rewriter(std::string_view s);

struct RewriteResult {
  std::string original;
  std::optional<std::string> antonym;
  Rewriter rewriter = Rewriter::template_rules;
  std::string diagnostic;  // set when antonym is absent
};

/// Maximum number of words a '*' slot may cover.
inline constexpr std::size_t kMaxSlotWords = 4;

/// True iff `form` matches `text` exactly over `span` (case-insensitive).
bool form_matches_at(std::string_view text, std::string_view form, CharSpan span);

/// Longest lexicon match (most literal words, then earliest start, then
/// shortest span, then form string). Absent when nothing matches.
std::optional<VerbObject> extract_verb_object(std::string_view text, const ChiralLexicon& lexicon,
                                              const LemmaTable& lemmas);

/// One entry per caption with a match, in corpus order.
std::vector<MinedCaption> mine_chiral(const CaptionCorpus& corpus, const ChiralLexicon& lexicon,
                                      const LemmaTable& lemmas);

/// Swaps the matched phrase for the first inflection-compatible form on the
/// opposite side of its pair. Everything outside the phrase is untouched.
RewriteResult rewrite_antonym_template(const MinedCaption& mined, const ChiralLexicon& lexicon,
                                       const LemmaTable& lemmas);

/// Asks an external LLM service for the temporal antonym.
/// Throws tara::Error on transport failure, an unparseable reply or an echo.
RewriteResult rewrite_antonym_external(const MinedCaption& mined, const LlmClient& client);

/// Replaces every "#C C" / "#O" placeholder in all three sentences with one
/// subject drawn uniformly from `pool`.
std::array<std::string, 3> replace_subjects(const std::array<std::string, 3>& texts,
                                            const std::vector<std::string>& pool, Rng& rng);

std::vector<std::string> load_subject_pool(const std::filesystem::path& path);

struct MinedRecord {
  MinedCaption mined;
  RewriteResult rewrite;
};

/// One {"id","text","pair_id","side","verb_form","object","antonym","rewriter"}
/// object per line.
std::string serialize_mined(const std::vector<MinedRecord>& records);

/// Re-runs extraction on every stored text and rejects records whose stored
/// verb fields disagree with the lexicon.
std::vector<MinedRecord> load_mined(const std::filesystem::path& path, const ChiralLexicon& lexicon,
                                    const LemmaTable& lemmas);

}  // namespace tara
