// Copyright (c) 2026, The tara-toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
#include "tara/corpus.hpp"

#include <cctype>

#include <fmt/format.h>

#include "tara/error.hpp"
#include "tara/io.hpp"

namespace tara {

namespace {

bool blank(std::string_view s) {
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

std::string_view to_string(Source s) {
  switch (s) {
    case Source::nli: return "nli";
    case Source::ego4d: return "ego4d";
    case Source::other: return "other";
  }
  return "other";
}

Source parse_source(std::string_view s) {
  if (s == "nli") return Source::nli;
  if (s == "ego4d") return Source::ego4d;
  if (s == "other") return Source::other;
  throw Error(fmt::format("unknown source '{}'", s));
}

bool has_placeholder(std::string_view text) {
  return text.find("#C C") != std::string_view::npos || text.find("#O") != std::string_view::npos;
}

CaptionCorpus::CaptionCorpus(std::vector<Caption> captions) : captions_(std::move(captions)) {
  by_id_.reserve(captions_.size());
  for (std::size_t i = 0; i < captions_.size(); ++i) {
    auto& c = captions_[i];
    if (blank(c.text)) throw Error(fmt::format("caption '{}' has empty text", c.id));
    c.has_placeholder = tara::has_placeholder(c.text);
    if (!by_id_.emplace(c.id, i).second) throw Error(fmt::format("duplicate caption id '{}'", c.id));
  }
}

const Caption* CaptionCorpus::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &captions_[it->second];
}

CaptionCorpus load_corpus(const std::filesystem::path& path) {
  std::vector<Caption> captions;
  std::unordered_map<std::string, std::size_t> seen;
  io::for_each_jsonl(path, [&](std::size_t line, const io::json& obj) {
    Caption c;
    c.id = obj.at("id").get<std::string>();
    c.text = obj.at("text").get<std::string>();
    try {
      c.source = parse_source(obj.at("source").get<std::string>());
    } catch (const Error& e) {
      throw Error(fmt::format("{}:{}: {}", path.string(), line, e.what()));
    }
    if (blank(c.text)) {
      throw Error(fmt::format("{}:{}: caption '{}' has empty text", path.string(), line, c.id));
    }
    if (auto [it, fresh] = seen.emplace(c.id, line); !fresh) {
      throw Error(fmt::format("{}:{}: duplicate caption id '{}' (first seen on line {})", path.string(),
                              line, c.id, it->second));
    }
    captions.push_back(std::move(c));
  });
  return CaptionCorpus(std::move(captions));
}

std::string serialize_corpus(const CaptionCorpus& corpus) {
  std::string out;
  for (const auto& c : corpus) {
    io::json j;
    j["id"] = c.id;
    j["text"] = c.text;
    j["source"] = std::string(to_string(c.source));
    out += io::to_line(j);
    out += '\n';
  }
  return out;
}

std::string_view to_string(Side s) { return s == Side::a ? "a" : "b"; }

Side parse_side(std::string_view s) {
  if (s == "a") return Side::a;
  if (s == "b") return Side::b;
  throw Error(fmt::format("unknown side '{}'", s));
}

std::string normalize_form(std::string_view form) {
  std::string out;
  bool pending_space = false;
  for (char ch : form) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

ChiralLexicon::ChiralLexicon(std::vector<ChiralPair> pairs) : pairs_(std::move(pairs)) {
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    auto& p = pairs_[i];
    if (!by_id_.emplace(p.pair_id, i).second) throw Error(fmt::format("duplicate pair_id {}", p.pair_id));
    for (Side side : {Side::a, Side::b}) {
      auto& forms = side == Side::a ? p.side_a : p.side_b;
      if (forms.empty()) {
        throw Error(fmt::format("pair {} has an empty side_{}", p.pair_id, to_string(side)));
      }
      for (auto& f : forms) {
        f = normalize_form(f);
        if (f.empty()) throw Error(fmt::format("pair {} has an empty form", p.pair_id));
        auto [it, fresh] = by_form_.emplace(f, LexiconEntry{p.pair_id, side});
        if (!fresh) {
          throw Error(fmt::format("form '{}' appears in pair {} side_{} and pair {} side_{}", f,
                                  it->second.pair_id, to_string(it->second.side), p.pair_id,
                                  to_string(side)));
        }
      }
    }
  }
}

std::optional<LexiconEntry> ChiralLexicon::lookup(std::string_view form) const {
  auto it = by_form_.find(normalize_form(form));
  if (it == by_form_.end()) return std::nullopt;
  return it->second;
}

const ChiralPair& ChiralLexicon::pair(int pair_id) const {
  auto it = by_id_.find(pair_id);
  if (it == by_id_.end()) throw Error(fmt::format("unknown pair_id {}", pair_id));
  return pairs_[it->second];
}

ChiralLexicon load_lexicon(const std::filesystem::path& path) {
  std::vector<ChiralPair> pairs;
  io::for_each_jsonl(path, [&](std::size_t, const io::json& obj) {
    ChiralPair p;
    p.pair_id = obj.at("pair_id").get<int>();
    p.side_a = obj.at("side_a").get<std::vector<std::string>>();
    p.side_b = obj.at("side_b").get<std::vector<std::string>>();
    pairs.push_back(std::move(p));
  });
  try {
    return ChiralLexicon(std::move(pairs));
  } catch (const Error& e) {
    throw Error(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace tara
