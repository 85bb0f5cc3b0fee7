// Copyright (c) 2026, The tara-toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Tokenization and the shipped inflection table used by the miner.
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tara {

struct Token {
  std::string lower;
  std::size_t begin = 0;  // byte offsets into the source text
  std::size_t end = 0;
  bool is_word = false;
};

/// Words are maximal runs of ASCII alphanumerics, apostrophes and inner
/// hyphens; every other non-space byte is a one-byte punctuation token.
std::vector<Token> tokenize(std::string_view text);

/// Determiners, pronouns, prepositions, particles and a few common
/// adjectives skipped when looking for the object noun.
bool is_object_stopword(std::string_view lower_word);

enum class Inflection { base, third_singular, gerund, past };

std::string_view to_string(Inflection f);

struct VerbForm {
  std::string lemma;
  Inflection inflection;
};

/// Surface-to-lemma map for verbs and nouns, plus the reverse verb table.
///
/// File format (tab separated, '#' comments):
///   V <lemma> <3sg> <gerund> <past>      '-' marks a missing form
///   N <lemma> <plural>
class LemmaTable {
 public:
  LemmaTable() = default;

  static LemmaTable load(const std::filesystem::path& path);
  static LemmaTable parse(std::string_view content);

  void add_verb(std::string lemma, std::optional<std::string> third_singular,
                std::optional<std::string> gerund, std::optional<std::string> past);
  void add_noun(std::string lemma, std::string plural);

  std::optional<VerbForm> verb(std::string_view surface) const;
  std::optional<std::string> inflect(std::string_view lemma, Inflection inflection) const;
  /// Lemma of any known surface (verbs first, then nouns); the input itself
  /// when unknown.
  std::string lemma(std::string_view surface) const;
  bool is_noun(std::string_view surface) const;

  std::size_t verb_count() const { return verbs_.size(); }

 private:
  struct VerbEntry {
    std::optional<std::string> forms[4];
  };
  std::unordered_map<std::string, VerbEntry> verbs_;
  std::unordered_map<std::string, VerbForm> verb_surfaces_;
  std::unordered_map<std::string, std::string> noun_surfaces_;
};

}  // namespace tara
