// Copyright (c) 2026, The tara-toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
#include "tara/miner.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include <fmt/format.h>

#include "tara/error.hpp"
#include "tara/io.hpp"
#include "tara/llm_client.hpp"

namespace tara {

namespace {

std::vector<std::string> split_form(std::string_view form) {
  std::vector<std::string> parts;
  std::istringstream in{std::string(form)};
  std::string p;
  while (in >> p) parts.push_back(p);
  return parts;
}

bool is_slot(const std::string& part) { return part == "*"; }

struct Match {
  std::size_t tok_begin = 0;
  std::size_t tok_end = 0;  // exclusive
  std::optional<std::pair<std::size_t, std::size_t>> slot;  // token range
};

// Matches parts[pi..] against tokens[ti..]; slots take the fewest words that
// let the remainder match.
bool match_parts(const std::vector<std::string>& parts, std::size_t pi, const std::vector<Token>& tokens,
                 std::size_t ti, Match& m) {
  if (pi == parts.size()) {
    m.tok_end = ti;
    return true;
  }
  if (is_slot(parts[pi])) {
    for (std::size_t len = 1; len <= kMaxSlotWords && ti + len <= tokens.size(); ++len) {
      if (!tokens[ti + len - 1].is_word) break;
      if (match_parts(parts, pi + 1, tokens, ti + len, m)) {
        if (!m.slot) m.slot = std::make_pair(ti, ti + len);
        return true;
      }
    }
    return false;
  }
  if (ti >= tokens.size() || !tokens[ti].is_word || tokens[ti].lower != parts[pi]) return false;
  return match_parts(parts, pi + 1, tokens, ti + 1, m);
}

struct Candidate {
  const std::string* form;
  LexiconEntry entry;
  std::size_t literal_words;
  Match match;
  CharSpan span;
};

// Forms indexed by their first literal word. Built per call; lexicons are
// small relative to corpora so callers that mine many captions share one.
class FormIndex {
 public:
  explicit FormIndex(const ChiralLexicon& lexicon) {
    for (const auto& pair : lexicon.pairs()) {
      for (Side side : {Side::a, Side::b}) {
        for (const auto& form : pair.forms(side)) {
          auto parts = split_form(form);
          if (parts.empty() || is_slot(parts.front())) continue;
          const auto literal = static_cast<std::size_t>(
              std::count_if(parts.begin(), parts.end(), [](const auto& p) { return !is_slot(p); }));
          by_head_[parts.front()].push_back({&form, LexiconEntry{pair.pair_id, side}, std::move(parts), literal});
        }
      }
    }
  }

  std::optional<Candidate> best(const std::vector<Token>& tokens) const {
    std::optional<Candidate> best;
    for (std::size_t ti = 0; ti < tokens.size(); ++ti) {
      if (!tokens[ti].is_word) continue;
      auto it = by_head_.find(tokens[ti].lower);
      if (it == by_head_.end()) continue;
      for (const auto& f : it->second) {
        Match m;
        m.tok_begin = ti;
        if (!match_parts(f.parts, 0, tokens, ti, m)) continue;
        Candidate c{f.form, f.entry, f.literal_words, m,
                    CharSpan{tokens[ti].begin, tokens[m.tok_end - 1].end}};
        if (!best || better(c, *best)) best = c;
      }
    }
    return best;
  }

 private:
  static bool better(const Candidate& x, const Candidate& y) {
    return std::make_tuple(-static_cast<long>(x.literal_words), x.span.begin, x.span.size(), *x.form) <
           std::make_tuple(-static_cast<long>(y.literal_words), y.span.begin, y.span.size(), *y.form);
  }

  struct Form {
    const std::string* form;
    LexiconEntry entry;
    std::vector<std::string> parts;
    std::size_t literal_words;
  };
  std::unordered_map<std::string, std::vector<Form>> by_head_;
};

// Head of the first noun phrase in [from, to): the last known noun of the
// first run of content words, or the run's first word when none is known.
std::string first_object(const std::vector<Token>& tokens, std::size_t from, std::size_t to,
                         const LemmaTable& lemmas) {
  auto content = [&](std::size_t i) {
    return !is_object_stopword(tokens[i].lower) &&
           !std::isdigit(static_cast<unsigned char>(tokens[i].lower.front()));
  };
  std::size_t i = from;
  while (i < to && tokens[i].is_word && !content(i)) ++i;
  if (i >= to || !tokens[i].is_word) return {};
  std::size_t head = i;
  for (std::size_t j = i; j < to && tokens[j].is_word && content(j); ++j) {
    if (lemmas.is_noun(tokens[j].lower)) head = j;
  }
  return lemmas.lemma(tokens[head].lower);
}

std::optional<VerbObject> extract_with(std::string_view text, const FormIndex& index,
                                       const LemmaTable& lemmas) {
  const auto tokens = tokenize(text);
  auto best = index.best(tokens);
  if (!best) return std::nullopt;
  VerbObject vo;
  vo.verb_form = *best->form;
  vo.pair_id = best->entry.pair_id;
  vo.side = best->entry.side;
  vo.span = best->span;
  if (best->match.slot) {
    auto [sb, se] = *best->match.slot;
    vo.slot = CharSpan{tokens[sb].begin, tokens[se - 1].end};
    vo.object = first_object(tokens, sb, se, lemmas);
  } else {
    vo.object = first_object(tokens, best->match.tok_end, tokens.size(), lemmas);
  }
  return vo;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string_view to_string(Rewriter r) { return r == Rewriter::external ? "external" : "template"; }

Rewriter parse_rewriter(std::string_view s) {
  if (s == "template") return Rewriter::template_rules;
  if (s == "external") return Rewriter::external;
  throw Error(fmt::format("unknown rewriter '{}'", s));
}

bool form_matches_at(std::string_view text, std::string_view form, CharSpan span) {
  if (span.end > text.size() || span.begin >= span.end) return false;
  const auto tokens = tokenize(text);
  const auto parts = split_form(form);
  for (std::size_t ti = 0; ti < tokens.size(); ++ti) {
    if (tokens[ti].begin != span.begin) continue;
    Match m;
    if (!match_parts(parts, 0, tokens, ti, m)) return false;
    return tokens[m.tok_end - 1].end == span.end;
  }
  return false;
}

std::optional<VerbObject> extract_verb_object(std::string_view text, const ChiralLexicon& lexicon,
                                              const LemmaTable& lemmas) {
  return extract_with(text, FormIndex(lexicon), lemmas);
}

std::vector<MinedCaption> mine_chiral(const CaptionCorpus& corpus, const ChiralLexicon& lexicon,
                                      const LemmaTable& lemmas) {
  const FormIndex index(lexicon);
  std::vector<MinedCaption> out;
  for (const auto& caption : corpus) {
    if (auto vo = extract_with(caption.text, index, lemmas)) out.push_back({caption, std::move(*vo)});
  }
  return out;
}

RewriteResult rewrite_antonym_template(const MinedCaption& mined, const ChiralLexicon& lexicon,
                                       const LemmaTable& lemmas) {
  const auto& text = mined.caption.text;
  const auto& vo = mined.vo;
  RewriteResult result{text, std::nullopt, Rewriter::template_rules, {}};

  const auto parts = split_form(vo.verb_form);
  const auto head = std::find_if(parts.begin(), parts.end(), [](const auto& p) { return !is_slot(p); });
  const auto head_form = head == parts.end() ? std::nullopt : lemmas.verb(*head);
  if (!head_form) {
    result.diagnostic = fmt::format("no inflection entry for '{}'", vo.verb_form);
    return result;
  }
  const Inflection target = head_form->inflection;
  const bool have_slot = vo.slot.has_value();

  auto slotted = [](const std::vector<std::string>& ps) {
    return std::any_of(ps.begin(), ps.end(), is_slot);
  };

  std::optional<std::vector<std::string>> chosen;
  const auto& opposite = lexicon.pair(vo.pair_id).forms(tara::opposite(vo.side));
  for (const auto& form : opposite) {
    auto ps = split_form(form);
    if (ps.empty() || is_slot(ps.front())) continue;
    if (slotted(ps) && !have_slot) continue;
    auto ov = lemmas.verb(ps.front());
    if (ov && ov->inflection == target) {
      chosen = std::move(ps);
      break;
    }
  }
  if (!chosen) {
    // derive the needed inflection from the canonical form's lemma
    auto ps = split_form(opposite.front());
    if (!ps.empty() && !is_slot(ps.front()) && !(slotted(ps) && !have_slot)) {
      auto ov = lemmas.verb(ps.front());
      auto inflected = lemmas.inflect(ov ? ov->lemma : ps.front(), target);
      if (inflected) {
        ps.front() = *inflected;
        chosen = std::move(ps);
      }
    }
  }
  if (!chosen) {
    result.diagnostic = fmt::format("pair {} side_{} has no {} form compatible with '{}'", vo.pair_id,
                                    to_string(tara::opposite(vo.side)), to_string(target), vo.verb_form);
    return result;
  }

  const std::string slot_text = have_slot ? text.substr(vo.slot->begin, vo.slot->size()) : std::string();
  std::string phrase;
  bool slot_used = false;
  for (const auto& p : *chosen) {
    if (!phrase.empty()) phrase += ' ';
    if (is_slot(p)) {
      phrase += slot_text;
      slot_used = true;
    } else {
      phrase += p;
    }
  }
  if (have_slot && !slot_used) phrase += ' ' + slot_text;
  if (std::isupper(static_cast<unsigned char>(text[vo.span.begin]))) {
    phrase[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(phrase[0])));
  }

  std::string antonym = text.substr(0, vo.span.begin) + phrase + text.substr(vo.span.end);
  if (antonym == text) {
    result.diagnostic = "rewrite reproduced the original caption";
    return result;
  }
  result.antonym = std::move(antonym);
  return result;
}

RewriteResult rewrite_antonym_external(const MinedCaption& mined, const LlmClient& client) {
  const auto& text = mined.caption.text;
  const auto reply = client.request_antonym(text);
  RewriteResult result{text, std::nullopt, Rewriter::external, {}};
  if (!reply.is_object() || !reply.contains("caption_reverse")) {
    throw Error(fmt::format("unparseable rewriter reply for '{}': {}", mined.caption.id, reply.dump()));
  }
  const auto& reverse = reply.at("caption_reverse");
  if (reverse.is_null()) {
    result.diagnostic = "rewriter returned None";
    return result;
  }
  if (!reverse.is_string()) {
    throw Error(fmt::format("unparseable rewriter reply for '{}': caption_reverse is not a string",
                            mined.caption.id));
  }
  auto antonym = trim(reverse.get<std::string>());
  if (antonym == "None" || antonym.empty()) {
    result.diagnostic = "rewriter returned None";
    return result;
  }
  if (antonym == trim(text)) throw Error(fmt::format("echo rejected for caption '{}'", mined.caption.id));
  result.antonym = std::move(antonym);
  return result;
}

namespace {

constexpr std::array<std::string_view, 2> kPlaceholders = {"#C C", "#O"};

bool titlecase_word_at(const std::string& s, std::size_t pos) {
  if (pos + 1 >= s.size()) return false;
  return std::isupper(static_cast<unsigned char>(s[pos])) && std::islower(static_cast<unsigned char>(s[pos + 1]));
}

std::string substitute(const std::string& text, const std::string& subject) {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t hit = std::string::npos;
    std::size_t len = 0;
    for (auto ph : kPlaceholders) {
      auto p = text.find(ph, i);
      if (p < hit) {
        hit = p;
        len = ph.size();
      }
    }
    if (hit == std::string::npos) {
      out.append(text, i, std::string::npos);
      break;
    }
    out.append(text, i, hit - i);
    const bool at_start = trim(out).empty();
    std::string subj = subject;
    if (!at_start && titlecase_word_at(subj, 0)) {
      // "The chef" reads "the chef" mid-sentence
      auto first_space = subj.find(' ');
      static const std::array<std::string_view, 3> kArticles = {"The", "A", "An"};
      auto first = subj.substr(0, first_space);
      if (std::find(kArticles.begin(), kArticles.end(), first) != kArticles.end()) {
        subj[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(subj[0])));
      }
    }
    out += subj;
    i = hit + len;
    // Ego4D capitalizes the verb after "#C C" ("#C C Puts down ...")
    std::size_t next = i;
    while (next < text.size() && text[next] == ' ') ++next;
    out.append(text, i, next - i);
    i = next;
    if (titlecase_word_at(text, i)) {
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(text[i])));
      ++i;
    }
  }
  for (auto& c : out) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    break;
  }
  return out;
}

}  // namespace

std::array<std::string, 3> replace_subjects(const std::array<std::string, 3>& texts,
                                            const std::vector<std::string>& pool, Rng& rng) {
  if (pool.empty()) throw Error("subject pool is empty");
  const auto& subject = pool[uniform_index(rng, pool.size())];
  std::array<std::string, 3> out;
  for (std::size_t k = 0; k < 3; ++k) {
    out[k] = has_placeholder(texts[k]) ? substitute(texts[k], subject) : texts[k];
  }
  return out;
}

std::vector<std::string> load_subject_pool(const std::filesystem::path& path) {
  std::istringstream in(io::read_text(path));
  std::vector<std::string> pool;
  std::string line;
  while (std::getline(in, line)) {
    auto s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    pool.push_back(std::move(s));
  }
  if (pool.empty()) throw Error(fmt::format("{}: subject pool is empty", path.string()));
  return pool;
}

std::string serialize_mined(const std::vector<MinedRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    io::json j;
    j["id"] = r.mined.caption.id;
    j["text"] = r.mined.caption.text;
    j["pair_id"] = r.mined.vo.pair_id;
    j["side"] = std::string(to_string(r.mined.vo.side));
    j["verb_form"] = r.mined.vo.verb_form;
    j["object"] = r.mined.vo.object;
    j["antonym"] = r.rewrite.antonym ? io::json(*r.rewrite.antonym) : io::json(nullptr);
    j["rewriter"] = std::string(to_string(r.rewrite.rewriter));
    out += io::to_line(j);
    out += '\n';
  }
  return out;
}

std::vector<MinedRecord> load_mined(const std::filesystem::path& path, const ChiralLexicon& lexicon,
                                    const LemmaTable& lemmas) {
  const FormIndex index(lexicon);
  std::vector<MinedRecord> out;
  io::for_each_jsonl(path, [&](std::size_t line, const io::json& obj) {
    MinedRecord r;
    r.mined.caption.id = obj.at("id").get<std::string>();
    r.mined.caption.text = obj.at("text").get<std::string>();
    r.mined.caption.has_placeholder = has_placeholder(r.mined.caption.text);
    auto vo = extract_with(r.mined.caption.text, index, lemmas);
    const auto side = parse_side(obj.at("side").get<std::string>());
    if (!vo || vo->pair_id != obj.at("pair_id").get<int>() || vo->side != side ||
        vo->verb_form != obj.at("verb_form").get<std::string>()) {
      throw Error(fmt::format("{}:{}: record '{}' does not match the lexicon", path.string(), line,
                              r.mined.caption.id));
    }
    r.mined.vo = std::move(*vo);
    r.mined.vo.object = obj.at("object").get<std::string>();
    const auto& antonym = obj.at("antonym");
    if (!antonym.is_null()) r.rewrite.antonym = antonym.get<std::string>();
    r.rewrite.original = r.mined.caption.text;
    r.rewrite.rewriter = parse_rewriter(obj.at("rewriter").get<std::string>());
    out.push_back(std::move(r));
  });
  return out;
}

}  // namespace tara
