#pragma once

/// Fuzzy matching between widgets described statically (markup) and
/// widgets observed on a rendered screen.
///
/// A widget is compared as a set of normalized (key, value) pairs; a
/// pair counts as shared only when key and value both agree after
/// trimming and casefolding. The static side always carries the keys
/// name, type and text, even when empty; the rendered side carries the
/// non-empty attributes the runtime reports. The score is intersection
/// over union of the two pair sets, kept as an exact ratio so the 1/2
/// threshold is sharp. When no candidate reaches the threshold the
/// match falls back to character edit distance between xpaths.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "miniscope/common.hpp"
#include "miniscope/wxml.hpp"

namespace miniscope {

// Exact non-negative fraction; denominators stay positive.
struct Ratio {
  long long num = 0;
  long long den = 1;

  double value() const { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }

  friend bool operator<(const Ratio& a, const Ratio& b) { return a.num * b.den < b.num * a.den; }
  friend bool operator==(const Ratio& a, const Ratio& b) { return a.num * b.den == b.num * a.den; }
  friend bool operator<=(const Ratio& a, const Ratio& b) { return a < b || a == b; }
};

inline size_t levenshtein(std::string_view a, std::string_view b) {
  if (a.size() > b.size()) std::swap(a, b);
  std::vector<size_t> row(a.size() + 1);
  for (size_t i = 0; i <= a.size(); ++i) row[i] = i;
  for (size_t j = 1; j <= b.size(); ++j) {
    size_t prev_diag = row[0];
    row[0] = j;
    for (size_t i = 1; i <= a.size(); ++i) {
      size_t del = row[i] + 1;
      size_t ins = row[i - 1] + 1;
      size_t sub = prev_diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      prev_diag = row[i];
      row[i] = std::min({del, ins, sub});
    }
  }
  return row[a.size()];
}

struct UiWidget {
  std::string xpath;
  std::map<std::string, std::string> attrs;
  std::vector<std::string> actions;

  auto operator<=>(const UiWidget&) const = default;
};

// Static description of a markup element: the tag becomes "type", the
// name attribute and direct text come along even when empty. Binding
// expressions are stripped; only static text can match a rendering.
inline UiWidget static_widget(const WxmlNode& node) {
  UiWidget w;
  w.xpath = node.xpath;
  const AttrValue* name = node.attr("name");
  w.attrs["name"] = name ? trim(strip_binding_regions(name->raw)) : "";
  w.attrs["type"] = node.tag;
  w.attrs["text"] = static_text(node);
  return w;
}

// Normalized pair set. keep_empty preserves keys with empty values (the
// static side); the rendered side drops them.
inline std::set<std::pair<std::string, std::string>> widget_pairs(
    const std::map<std::string, std::string>& attrs, bool keep_empty) {
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& [k, v] : attrs) {
    std::string value = casefold(trim(v));
    if (!keep_empty && value.empty()) continue;
    pairs.emplace(casefold(trim(k)), std::move(value));
  }
  return pairs;
}

inline Ratio pair_iou(const std::set<std::pair<std::string, std::string>>& a,
                      const std::set<std::pair<std::string, std::string>>& b) {
  long long inter = 0;
  for (const auto& p : a) inter += b.count(p);
  long long uni = static_cast<long long>(a.size() + b.size()) - inter;
  if (uni == 0) return {1, 1};  // two empty sets are identical
  return {inter, uni};
}

struct MatchResult {
  UiWidget candidate;
  int index = -1;        // position in the screen list
  std::string method;    // "iou" | "xpath"
  Ratio iou;             // meaningful when method == "iou"
  size_t distance = 0;   // meaningful when method == "xpath"
};

// Best candidate by pair IoU, or nothing when the maximum falls below
// 1/2. Ties resolve toward the smaller candidate xpath.
inline std::optional<MatchResult> iou_match(const std::map<std::string, std::string>& target_attrs,
                                            const std::vector<UiWidget>& screen) {
  auto target_pairs = widget_pairs(target_attrs, /*keep_empty=*/true);
  int best = -1;
  Ratio best_score;
  for (size_t i = 0; i < screen.size(); ++i) {
    Ratio score = pair_iou(target_pairs, widget_pairs(screen[i].attrs, /*keep_empty=*/false));
    if (score < Ratio{1, 2}) continue;
    if (best < 0 || best_score < score ||
        (score == best_score && screen[i].xpath < screen[static_cast<size_t>(best)].xpath)) {
      best = static_cast<int>(i);
      best_score = score;
    }
  }
  if (best < 0) return std::nullopt;
  MatchResult r;
  r.candidate = screen[static_cast<size_t>(best)];
  r.index = best;
  r.method = "iou";
  r.iou = best_score;
  return r;
}

// Candidate with the smallest xpath edit distance; always answers on a
// non-empty screen. Ties resolve toward the smaller candidate xpath.
inline MatchResult xpath_match(const std::string& target_xpath,
                               const std::vector<UiWidget>& screen) {
  if (screen.empty()) throw Error(ErrorCode::EmptyScreen, "no widgets rendered");
  int best = -1;
  size_t best_distance = 0;
  for (size_t i = 0; i < screen.size(); ++i) {
    size_t d = levenshtein(target_xpath, screen[i].xpath);
    if (best < 0 || d < best_distance ||
        (d == best_distance && screen[i].xpath < screen[static_cast<size_t>(best)].xpath)) {
      best = static_cast<int>(i);
      best_distance = d;
    }
  }
  MatchResult r;
  r.candidate = screen[static_cast<size_t>(best)];
  r.index = best;
  r.method = "xpath";
  r.distance = best_distance;
  return r;
}

// Key-attribute match first, xpath similarity as the fallback.
inline MatchResult locate_widget(const WxmlNode& wxml_widget, const std::vector<UiWidget>& screen) {
  if (screen.empty()) throw Error(ErrorCode::EmptyScreen, "no widgets rendered");
  UiWidget target = static_widget(wxml_widget);
  if (auto hit = iou_match(target.attrs, screen)) return *hit;
  return xpath_match(target.xpath, screen);
}

}  // namespace miniscope
