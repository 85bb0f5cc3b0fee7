// Copyright (c) 2026, The tara-toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
#include "tara/text.hpp"

#include <array>
#include <cctype>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>

#include "tara/error.hpp"
#include "tara/io.hpp"

namespace tara {

namespace {

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '\'' || c == '-';
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isalnum(static_cast<unsigned char>(c))) {
      std::size_t j = i + 1;
      while (j < text.size() && word_char(text[j])) ++j;
      // trailing hyphens and apostrophes belong to punctuation
      while (j > i + 1 && (text[j - 1] == '-' || text[j - 1] == '\'')) --j;
      tokens.push_back({lower(text.substr(i, j - i)), i, j, true});
      i = j;
      continue;
    }
    tokens.push_back({std::string(1, c), i, i + 1, false});
    ++i;
  }
  return tokens;
}

bool is_object_stopword(std::string_view w) {
  static const std::unordered_set<std::string_view> kStop = {
      // determiners and quantifiers
      "a", "an", "the", "this", "that", "these", "those", "some", "any", "another", "each", "every",
      "both", "all", "few", "several", "many", "much", "more", "most", "no", "one", "two", "three",
      // pronouns
      "his", "her", "its", "their", "my", "your", "our", "him", "them", "it", "he", "she", "they",
      "i", "you", "we", "me", "us", "itself", "himself", "herself", "themselves", "someone",
      "something",
      // prepositions and particles
      "up", "down", "off", "on", "in", "out", "into", "onto", "from", "to", "with", "at", "of",
      "for", "by", "over", "under", "away", "back", "again", "around", "through", "across", "along",
      "inside", "outside", "above", "below", "behind", "near", "upon", "apart", "together",
      // adverbs and conjunctions
      "also", "then", "and", "or", "but", "while", "as", "slowly", "quickly", "gently", "carefully",
      // common adjectives
      "left", "right", "small", "big", "little", "large", "other", "same", "new", "old", "empty",
      "full", "top", "bottom", "front"};
  return kStop.contains(w);
}

std::string_view to_string(Inflection f) {
  switch (f) {
    case Inflection::base: return "base";
    case Inflection::third_singular: return "3sg";
    case Inflection::gerund: return "gerund";
    case Inflection::past: return "past";
  }
  return "base";
}

void LemmaTable::add_verb(std::string lemma, std::optional<std::string> third_singular,
                          std::optional<std::string> gerund, std::optional<std::string> past) {
  VerbEntry entry;
  entry.forms[0] = lemma;
  entry.forms[1] = std::move(third_singular);
  entry.forms[2] = std::move(gerund);
  entry.forms[3] = std::move(past);
  constexpr std::array kOrder = {Inflection::base, Inflection::third_singular, Inflection::gerund,
                                 Inflection::past};
  for (std::size_t k = 0; k < 4; ++k) {
    if (entry.forms[k]) verb_surfaces_.try_emplace(*entry.forms[k], VerbForm{lemma, kOrder[k]});
  }
  verbs_[lemma] = std::move(entry);
}

void LemmaTable::add_noun(std::string lemma, std::string plural) {
  noun_surfaces_.try_emplace(lemma, lemma);
  noun_surfaces_.try_emplace(std::move(plural), std::move(lemma));
}

std::optional<VerbForm> LemmaTable::verb(std::string_view surface) const {
  auto it = verb_surfaces_.find(lower(surface));
  if (it == verb_surfaces_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> LemmaTable::inflect(std::string_view lemma, Inflection inflection) const {
  auto it = verbs_.find(std::string(lemma));
  if (it == verbs_.end()) return std::nullopt;
  return it->second.forms[static_cast<int>(inflection)];
}

std::string LemmaTable::lemma(std::string_view surface) const {
  const auto key = lower(surface);
  if (auto n = noun_surfaces_.find(key); n != noun_surfaces_.end()) return n->second;
  if (auto v = verb_surfaces_.find(key); v != verb_surfaces_.end()) return v->second.lemma;
  return key;
}

bool LemmaTable::is_noun(std::string_view surface) const {
  return noun_surfaces_.contains(lower(surface));
}

LemmaTable LemmaTable::parse(std::string_view content) {
  LemmaTable table;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;
  auto opt = [](const std::string& s) -> std::optional<std::string> {
    if (s == "-") return std::nullopt;
    return s;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::istringstream ls(line);
    std::string col;
    while (std::getline(ls, col, '\t')) cols.push_back(lower(col));
    if (cols.size() == 5 && cols[0] == "v") {
      table.add_verb(cols[1], opt(cols[2]), opt(cols[3]), opt(cols[4]));
    } else if (cols.size() == 3 && cols[0] == "n") {
      table.add_noun(cols[1], cols[2]);
    } else {
      throw Error(fmt::format("lemma table line {}: expected 'V lemma 3sg gerund past' or 'N lemma plural'",
                              line_no));
    }
  }
  return table;
}

LemmaTable LemmaTable::load(const std::filesystem::path& path) {
  try {
    return parse(io::read_text(path));
  } catch (const Error& e) {
    throw Error(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace tara
