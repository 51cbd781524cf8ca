#pragma once

/// Policy statements and cross-validation.
///
/// A statement is a (controller, action, entity) triple. The shipped
/// extractor is rule-based and deterministic: sentences are split on
/// ASCII and full-width terminators, every co-occurrence of a lexicon
/// action verb and a known entity phrase yields one statement, the
/// controller is the nearest cue phrase before the verb (first-party
/// when none appears), and "not"/"never"/"...n't" directly before the
/// verb suppresses it. A model-backed extractor exists as an interface
/// with the same output contract.
///
/// Cross-validation compares the categories a policy declares against
/// the categories the app was seen to touch. Dead-code practices never
/// count as observed; reachable-but-not-triggered practices do, tagged
/// with weaker evidence.

#include <algorithm>
#include <cctype>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "miniscope/api_catalog.hpp"
#include "miniscope/common.hpp"
#include "miniscope/practices.hpp"
#include "miniscope/runtime.hpp"

namespace miniscope {

inline bool in_taxonomy(const std::string& category) { return category_group(category) != "Other"; }

inline constexpr const char* kUnmapped = "unmapped";

struct Lexicons {
  std::vector<std::string> ssoc_verbs;
  std::vector<std::string> first_party_cues;
  std::vector<std::string> third_party_cues;
  std::map<std::string, std::string> entities;  // phrase -> category
  ApiCatalog catalog;
};

inline std::vector<std::string> default_first_party_cues() {
  return {"we",      "our",           "us",
          "developer", "the developer", "this app",
          "the app", "this mini program", "the mini program"};
}

inline Lexicons parse_lexicons(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "lexicon file must be a JSON object");
  Lexicons lex;
  if (!j.contains("ssoc_verbs") || !j["ssoc_verbs"].is_array())
    throw Error(ErrorCode::InvalidConfig, "lexicon needs an 'ssoc_verbs' array");
  for (const auto& v : j["ssoc_verbs"]) {
    if (!v.is_string()) throw Error(ErrorCode::InvalidConfig, "ssoc_verbs entries must be strings");
    lex.ssoc_verbs.push_back(casefold(trim(v.get<std::string>())));
  }
  if (j.contains("third_party_cues")) {
    if (!j["third_party_cues"].is_array())
      throw Error(ErrorCode::InvalidConfig, "'third_party_cues' must be an array");
    for (const auto& v : j["third_party_cues"])
      lex.third_party_cues.push_back(casefold(trim(v.get<std::string>())));
  }
  lex.first_party_cues = default_first_party_cues();
  if (j.contains("first_party_cues")) {  // optional override
    lex.first_party_cues.clear();
    for (const auto& v : j["first_party_cues"])
      lex.first_party_cues.push_back(casefold(trim(v.get<std::string>())));
  }
  if (j.contains("entities")) {
    if (!j["entities"].is_object())
      throw Error(ErrorCode::InvalidConfig, "'entities' must be an object of phrase -> category");
    for (auto it = j["entities"].begin(); it != j["entities"].end(); ++it) {
      if (!it.value().is_string())
        throw Error(ErrorCode::InvalidConfig, "entity category must be a string: " + it.key());
      lex.entities[casefold(trim(it.key()))] = it.value().get<std::string>();
    }
  }
  lex.catalog = j.contains("api_catalog") ? ApiCatalog::from_json(j["api_catalog"])
                                          : ApiCatalog::builtin();
  return lex;
}

inline Lexicons load_lexicons(const std::string& path) {
  auto text = read_file(path);
  if (!text) throw Error(ErrorCode::IoError, "cannot read lexicon file " + path);
  nlohmann::json j = nlohmann::json::parse(*text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw Error(ErrorCode::InvalidConfig, "lexicon file " + path + " is not valid JSON");
  return parse_lexicons(j);
}

struct PrivacyStatement {
  std::string party;           // "first-party" | "third-party"
  std::string dc_surface;      // cue text; empty when attribution defaulted
  std::string verb;            // lemma as listed in the lexicon
  std::string entity_surface;  // matched phrase, or the raw object text when unmapped
  std::string category;        // taxonomy category or "unmapped"
  std::string sentence;        // trimmed source sentence
  size_t offset = 0;           // byte offset of the sentence in the input text

  auto operator<=>(const PrivacyStatement&) const = default;
};

// ---- text utilities ----

// Sentences with their byte offsets. Terminators: . ? ! and their
// full-width forms. The terminator is not part of the sentence.
inline std::vector<std::pair<std::string, size_t>> split_sentences(const std::string& text) {
  std::vector<std::pair<std::string, size_t>> out;
  size_t start = 0, i = 0;
  auto flush = [&](size_t end, size_t next) {
    std::string s = text.substr(start, end - start);
    std::string trimmed(trim(s));
    if (!trimmed.empty()) {
      size_t lead = s.find_first_not_of(" \t\r\n");
      out.emplace_back(trimmed, start + (lead == std::string::npos ? 0 : lead));
    }
    start = next;
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '.' || c == '?' || c == '!') {
      flush(i, i + 1);
      i += 1;
      continue;
    }
    // Full-width terminators are 3-byte UTF-8 sequences.
    if (i + 2 < text.size()) {
      unsigned char b0 = static_cast<unsigned char>(text[i]);
      unsigned char b1 = static_cast<unsigned char>(text[i + 1]);
      unsigned char b2 = static_cast<unsigned char>(text[i + 2]);
      bool ideographic_stop = b0 == 0xE3 && b1 == 0x80 && b2 == 0x82;       // U+3002
      bool fullwidth_question = b0 == 0xEF && b1 == 0xBC && b2 == 0x9F;     // U+FF1F
      bool fullwidth_exclaim = b0 == 0xEF && b1 == 0xBC && b2 == 0x81;      // U+FF01
      if (ideographic_stop || fullwidth_question || fullwidth_exclaim) {
        flush(i, i + 3);
        i += 3;
        continue;
      }
    }
    ++i;
  }
  flush(text.size(), text.size());
  return out;
}

namespace detail {

inline bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '\'';
}

struct WordToken {
  std::string text;  // casefolded
  size_t pos = 0;    // byte offset in the sentence
};

inline std::vector<WordToken> tokenize_words(const std::string& sentence) {
  std::vector<WordToken> out;
  size_t i = 0;
  while (i < sentence.size()) {
    if (!word_char(sentence[i])) { ++i; continue; }
    size_t j = i;
    while (j < sentence.size() && word_char(sentence[j])) ++j;
    out.push_back({casefold(sentence.substr(i, j - i)), i});
    i = j;
  }
  return out;
}

// Inflection match: collect/collects/collected/collecting all resolve to
// the lemma "collect"; a trailing 'e' drops before "ing"/"ed" suffixes.
inline bool matches_lemma(const std::string& word, const std::string& lemma) {
  if (word == lemma) return true;
  if (word == lemma + "s" || word == lemma + "es") return true;
  if (word == lemma + "ed" || word == lemma + "d") return true;
  if (word == lemma + "ing") return true;
  if (lemma.size() > 1 && lemma.back() == 'e') {
    std::string stem = lemma.substr(0, lemma.size() - 1);
    if (word == stem + "ing" || word == stem + "ed") return true;
  }
  return false;
}

// Occurrences of a multi-word phrase at word boundaries, on the
// casefolded sentence.
inline std::vector<size_t> phrase_positions(const std::string& folded, const std::string& phrase) {
  std::vector<size_t> out;
  if (phrase.empty()) return out;
  size_t from = 0;
  while (true) {
    size_t pos = folded.find(phrase, from);
    if (pos == std::string::npos) break;
    bool left_ok = pos == 0 || !word_char(folded[pos - 1]);
    size_t end = pos + phrase.size();
    bool right_ok = end >= folded.size() || !word_char(folded[end]);
    if (left_ok && right_ok) out.push_back(pos);
    from = pos + 1;
  }
  return out;
}

struct EntityHit {
  size_t pos = 0;
  std::string phrase;
  std::string category;
};

// Greedy longest-match, left to right, non-overlapping.
inline std::vector<EntityHit> match_entities(const std::string& folded,
                                             const std::map<std::string, std::string>& table) {
  std::vector<std::pair<std::string, std::string>> by_length(table.begin(), table.end());
  std::sort(by_length.begin(), by_length.end(), [](const auto& a, const auto& b) {
    if (a.first.size() != b.first.size()) return a.first.size() > b.first.size();
    return a.first < b.first;
  });
  std::vector<EntityHit> out;
  size_t i = 0;
  while (i < folded.size()) {
    if (i > 0 && word_char(folded[i - 1])) { ++i; continue; }
    bool matched = false;
    for (const auto& [phrase, category] : by_length) {
      if (folded.compare(i, phrase.size(), phrase) != 0) continue;
      size_t end = i + phrase.size();
      if (end < folded.size() && word_char(folded[end])) continue;
      out.push_back({i, phrase, category});
      i = end;
      matched = true;
      break;
    }
    if (!matched) ++i;
  }
  return out;
}

}  // namespace detail

inline std::vector<PrivacyStatement> extract_statements(const std::string& policy_text,
                                                        const Lexicons& lex) {
  std::vector<PrivacyStatement> out;
  for (const auto& [sentence, offset] : split_sentences(policy_text)) {
    std::string folded = casefold(sentence);
    auto words = detail::tokenize_words(sentence);

    struct VerbHit { size_t pos; std::string lemma; };
    std::vector<VerbHit> verbs;
    for (size_t w = 0; w < words.size(); ++w) {
      for (const std::string& lemma : lex.ssoc_verbs) {
        if (!detail::matches_lemma(words[w].text, lemma)) continue;
        bool negated = false;
        if (w > 0) {
          const std::string& prev = words[w - 1].text;
          negated = prev == "not" || prev == "never" || prev.ends_with("n't");
        }
        if (!negated) verbs.push_back({words[w].pos, lemma});
        break;
      }
    }
    if (verbs.empty()) continue;

    auto entities = detail::match_entities(folded, lex.entities);
    if (entities.empty()) continue;

    struct CueHit { size_t pos; size_t len; bool third; std::string surface; };
    std::vector<CueHit> cues;
    for (const std::string& cue : lex.first_party_cues)
      for (size_t pos : detail::phrase_positions(folded, cue))
        cues.push_back({pos, cue.size(), false, sentence.substr(pos, cue.size())});
    for (const std::string& cue : lex.third_party_cues)
      for (size_t pos : detail::phrase_positions(folded, cue))
        cues.push_back({pos, cue.size(), true, sentence.substr(pos, cue.size())});
    // Prefer the longer cue at the same spot ("the developer" over
    // "developer" when both start there).
    std::sort(cues.begin(), cues.end(), [](const CueHit& a, const CueHit& b) {
      if (a.pos != b.pos) return a.pos < b.pos;
      return a.len > b.len;
    });

    for (const auto& [verb_pos, lemma] : verbs) {
      const CueHit* nearest = nullptr;
      for (const CueHit& cue : cues) {
        if (cue.pos >= verb_pos) break;
        if (!nearest || cue.pos > nearest->pos) nearest = &cue;
      }
      for (const detail::EntityHit& hit : entities) {
        PrivacyStatement s;
        s.party = nearest && nearest->third ? "third-party" : "first-party";
        s.dc_surface = nearest ? nearest->surface : "";
        s.verb = lemma;
        s.entity_surface = sentence.substr(hit.pos, hit.phrase.size());
        s.category = in_taxonomy(hit.category) ? hit.category : std::string(kUnmapped);
        s.sentence = sentence;
        s.offset = offset;
        out.push_back(std::move(s));
      }
    }
  }
  return out;
}

inline std::string map_api_to_entity(const std::string& api, const ApiCatalog& catalog) {
  auto cat = catalog.category(api);
  if (!cat) throw Error(ErrorCode::UnknownApi, "api '" + api + "' is not in the catalog");
  return *cat;
}

// ---- model-backed extraction (interface only) ----

struct TripleRow {
  std::string subject;
  std::string verb;
  std::string object;
};

// One request per sentence; the completion must contain one row per
// disclosure, fields separated by '|'.
inline std::string render_extraction_prompt(const std::string& sentence) {
  std::string p;
  p += "Extract data-handling disclosures from the sentence.\n";
  p += "Answer with one line per disclosure, formatted as:\n";
  p += "subject | verb | object\n";
  p += "where subject is the party handling the data, verb is the handling\n";
  p += "action, and object is the data item. Answer with no lines if the\n";
  p += "sentence discloses nothing.\n\n";
  p += "Sentence: our partners may share your device identifier\n";
  p += "our partners | share | device identifier\n\n";
  p += "Sentence: you can change these settings at any time\n";
  p += "\n\n";
  p += "Sentence: " + sentence + "\n";
  return p;
}

inline std::vector<TripleRow> parse_triple_rows(const std::string& completion) {
  std::vector<TripleRow> out;
  for (const std::string& line : split(completion, '\n')) {
    auto first = line.find('|');
    if (first == std::string::npos) continue;
    auto second = line.find('|', first + 1);
    if (second == std::string::npos) continue;
    TripleRow row;
    row.subject = trim(line.substr(0, first));
    row.verb = trim(line.substr(first + 1, second - first - 1));
    row.object = trim(line.substr(second + 1));
    if (!row.verb.empty()) out.push_back(std::move(row));
  }
  return out;
}

class CompletionClient {
 public:
  virtual ~CompletionClient() = default;
  virtual std::string complete(const std::string& prompt) = 0;
};

// Adapter from completion rows to statements: the verb must resolve to a
// lexicon lemma, the object resolves through the entity table (raw
// surface + unmapped otherwise), the subject through the cue lists.
inline std::vector<PrivacyStatement> extract_statements_via_model(const std::string& policy_text,
                                                                  const Lexicons& lex,
                                                                  CompletionClient& client) {
  std::vector<PrivacyStatement> out;
  for (const auto& [sentence, offset] : split_sentences(policy_text)) {
    for (const TripleRow& row : parse_triple_rows(client.complete(render_extraction_prompt(sentence)))) {
      std::string verb_folded = casefold(row.verb);
      std::string lemma;
      for (const std::string& l : lex.ssoc_verbs)
        if (detail::matches_lemma(verb_folded, l)) { lemma = l; break; }
      if (lemma.empty()) continue;

      PrivacyStatement s;
      std::string subject_folded = casefold(row.subject);
      s.party = "first-party";
      for (const std::string& cue : lex.third_party_cues)
        if (!detail::phrase_positions(subject_folded, cue).empty()) { s.party = "third-party"; break; }
      s.dc_surface = row.subject;
      s.verb = lemma;
      auto hits = detail::match_entities(casefold(row.object), lex.entities);
      if (!hits.empty()) {
        s.entity_surface = hits.front().phrase;
        s.category = in_taxonomy(hits.front().category) ? hits.front().category
                                                        : std::string(kUnmapped);
      } else {
        s.entity_surface = row.object;
        s.category = kUnmapped;
      }
      s.sentence = sentence;
      s.offset = offset;
      out.push_back(std::move(s));
    }
  }
  return out;
}

// ---- cross-validation ----

struct ObservedCategory {
  std::string category;
  std::string evidence;  // "dynamic" | "static-reachable"

  auto operator<=>(const ObservedCategory&) const = default;
};

struct CategoryEvidence {
  std::vector<PrivacyPractice> practices;
  std::vector<ObservedApiEvent> events;
  std::vector<PrivacyStatement> statements;
};

struct InconsistencyReport {
  std::set<std::string> declared;
  std::vector<ObservedCategory> observed;  // sorted by category
  std::set<std::string> redundant;         // declared but never observed
  std::set<std::string> omitted;           // observed but never declared
  std::vector<PrivacyStatement> unmapped;  // excluded from the set arithmetic
  std::map<std::string, CategoryEvidence> evidence;
  Diagnostics diagnostics;
};

inline InconsistencyReport cross_validate(const std::vector<PrivacyPractice>& practices,
                                          const std::vector<PrivacyStatement>& statements,
                                          const std::vector<ObservedApiEvent>& dynamic_observed,
                                          const ApiCatalog& catalog) {
  InconsistencyReport r;
  for (const PrivacyStatement& s : statements) {
    if (s.category == kUnmapped) {
      r.unmapped.push_back(s);
      continue;
    }
    r.declared.insert(s.category);
    r.evidence[s.category].statements.push_back(s);
  }

  std::set<std::string> dynamic_cats;
  for (const ObservedApiEvent& e : dynamic_observed) {
    auto cat = catalog.category(e.event.api);
    if (!cat) {
      r.diagnostics.push_back({"unknown-api",
                               "runtime event for uncataloged api '" + e.event.api + "'", e.page});
      continue;
    }
    dynamic_cats.insert(*cat);
    r.evidence[*cat].events.push_back(e);
  }

  std::set<std::string> static_cats;
  for (const PrivacyPractice& p : practices) {
    if (p.verdict != "reachable") continue;  // dead code never observes anything
    static_cats.insert(p.site.category);
    r.evidence[p.site.category].practices.push_back(p);
  }

  std::set<std::string> observed_set = dynamic_cats;
  observed_set.insert(static_cats.begin(), static_cats.end());
  for (const std::string& cat : observed_set)
    r.observed.push_back({cat, dynamic_cats.count(cat) ? "dynamic" : "static-reachable"});

  std::set_difference(r.declared.begin(), r.declared.end(), observed_set.begin(),
                      observed_set.end(), std::inserter(r.redundant, r.redundant.end()));
  std::set_difference(observed_set.begin(), observed_set.end(), r.declared.begin(),
                      r.declared.end(), std::inserter(r.omitted, r.omitted.end()));
  return r;
}

// ---- serialization ----

inline nlohmann::json to_json(const PrivacyStatement& s) {
  return {{"party", s.party},   {"dc_surface", s.dc_surface},
          {"verb", s.verb},     {"entity_surface", s.entity_surface},
          {"category", s.category}, {"sentence", s.sentence},
          {"offset", s.offset}};
}

inline nlohmann::json to_json(const InconsistencyReport& r) {
  nlohmann::json j;
  j["declared"] = std::vector<std::string>(r.declared.begin(), r.declared.end());
  nlohmann::json observed = nlohmann::json::array();
  for (const ObservedCategory& o : r.observed)
    observed.push_back({{"category", o.category}, {"evidence", o.evidence}});
  j["observed"] = std::move(observed);
  j["redundant"] = std::vector<std::string>(r.redundant.begin(), r.redundant.end());
  j["omitted"] = std::vector<std::string>(r.omitted.begin(), r.omitted.end());
  nlohmann::json unmapped = nlohmann::json::array();
  for (const PrivacyStatement& s : r.unmapped) unmapped.push_back(to_json(s));
  j["unmapped"] = std::move(unmapped);
  nlohmann::json evidence;
  for (const auto& [cat, ev] : r.evidence) {
    nlohmann::json e;
    nlohmann::json practices = nlohmann::json::array();
    for (const PrivacyPractice& p : ev.practices) practices.push_back(to_json(p));
    nlohmann::json events = nlohmann::json::array();
    for (const ObservedApiEvent& oe : ev.events)
      events.push_back({{"api", oe.event.api},
                        {"args_digest", oe.event.args_digest},
                        {"page", oe.page},
                        {"source", oe.source}});
    nlohmann::json statements = nlohmann::json::array();
    for (const PrivacyStatement& s : ev.statements) statements.push_back(to_json(s));
    e["practices"] = std::move(practices);
    e["events"] = std::move(events);
    e["statements"] = std::move(statements);
    evidence[cat] = std::move(e);
  }
  j["evidence"] = std::move(evidence);
  nlohmann::json diags = nlohmann::json::array();
  for (const Diagnostic& d : r.diagnostics) diags.push_back(to_json(d));
  j["diagnostics"] = std::move(diags);
  return j;
}

}  // namespace miniscope
