#pragma once

/// Markup parser for MiniApp page templates.
///
/// The parser is a hand-written recursive descent over tags, attributes
/// and text. It is deliberately forgiving: malformed input never throws,
/// unclosed elements are closed at end of input and stray close tags are
/// skipped, each with a diagnostic. Control attributes such as wx:for and
/// wx:if are kept as plain attributes; interpretation is the caller's job.
///
/// Every node carries an xpath of the form parent-xpath + "/tag[i]" with a
/// 1-based index among same-tag siblings; the synthetic root is "/page".
/// Text runs are kept as "#text" children so a parse/serialize round trip
/// is structure-preserving.

#include <compare>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "miniscope/common.hpp"

namespace miniscope {

// Attribute value: the raw text plus any {{...}} binding expressions that
// appear inside it. `bindings` is non-empty iff the raw text contains at
// least one balanced {{...}} region.
struct AttrValue {
  std::string raw;
  std::vector<std::string> bindings;

  bool operator==(const AttrValue&) const = default;
};

struct WxmlNode {
  std::string tag;  // "#text" for text runs
  std::vector<std::pair<std::string, AttrValue>> attrs;  // document order
  std::vector<WxmlNode> children;
  std::string xpath;
  std::string text;  // raw content of #text nodes, empty otherwise
  std::vector<std::string> text_bindings;  // bindings inside `text`
  Span span;

  bool is_text() const { return tag == "#text"; }

  const AttrValue* attr(std::string_view name) const {
    for (const auto& [k, v] : attrs)
      if (k == name) return &v;
    return nullptr;
  }
};

struct WxmlDoc {
  std::string page;  // page path the template belongs to
  WxmlNode root;     // synthetic root, tag "page", xpath "/page"
  Diagnostics diagnostics;
};

// Scans raw attribute/text content for balanced {{...}} regions and
// returns the trimmed inner expressions, in order.
inline std::vector<std::string> extract_binding_exprs(std::string_view raw) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (true) {
    size_t open = raw.find("{{", pos);
    if (open == std::string_view::npos) break;
    size_t close = raw.find("}}", open + 2);
    if (close == std::string_view::npos) break;
    out.emplace_back(trim(raw.substr(open + 2, close - open - 2)));
    pos = close + 2;
  }
  return out;
}

// Static text with binding regions removed, used when matching widgets.
inline std::string strip_binding_regions(std::string_view raw) {
  std::string out;
  size_t pos = 0;
  while (true) {
    size_t open = raw.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(raw.substr(pos));
      return out;
    }
    out.append(raw.substr(pos, open - pos));
    size_t close = raw.find("}}", open + 2);
    if (close == std::string_view::npos) {
      out.append(raw.substr(open));
      return out;
    }
    pos = close + 2;
  }
}

// True for expressions of the restricted binding form: a dotted chain of
// identifiers ("a", "item.name", "this.data.x"). Anything else is treated
// as unresolvable by the data-flow layer.
inline bool is_dotted_path(std::string_view expr) {
  if (expr.empty()) return false;
  bool start_of_segment = true;
  for (char c : expr) {
    if (start_of_segment) {
      if (!(std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$')) return false;
      start_of_segment = false;
    } else if (c == '.') {
      start_of_segment = true;
    } else if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$')) {
      return false;
    }
  }
  return !start_of_segment;
}

namespace detail {

class WxmlParser {
 public:
  WxmlParser(std::string_view src, const std::string& page) : src_(src), page_(page) {}

  WxmlDoc run() {
    WxmlDoc doc;
    doc.page = page_;
    doc.root.tag = "page";
    doc.root.span = span_from(0);
    parse_children(doc.root, /*close_tag=*/"");
    finish_span(doc.root, pos_);
    assign_xpaths(doc.root, "/page");
    doc.diagnostics = std::move(diags_);
    return doc;
  }

 private:
  std::string_view src_;
  std::string page_;
  size_t pos_ = 0;
  Diagnostics diags_;

  bool eof() const { return pos_ >= src_.size(); }
  char peek(size_t off = 0) const { return pos_ + off < src_.size() ? src_[pos_ + off] : '\0'; }
  bool lookahead(std::string_view s) const { return src_.substr(pos_).starts_with(s); }

  Span span_from(size_t begin) const {
    Span s;
    s.begin = begin;
    s.end = begin;
    int line = 1, col = 1;
    for (size_t i = 0; i < begin && i < src_.size(); ++i) {
      if (src_[i] == '\n') { ++line; col = 1; } else { ++col; }
    }
    s.line = s.end_line = line;
    s.col = s.end_col = col;
    return s;
  }

  void finish_span(WxmlNode& n, size_t end) {
    n.span.end = end;
    int line = n.span.line, col = n.span.col;
    for (size_t i = n.span.begin; i < end && i < src_.size(); ++i) {
      if (src_[i] == '\n') { ++line; col = 1; } else { ++col; }
    }
    n.span.end_line = line;
    n.span.end_col = col;
  }

  void diagnose(std::string code, std::string msg) {
    diags_.push_back({std::move(code), std::move(msg), page_});
  }

  // Parses children of `parent` until the matching close tag (or EOF).
  // Returns true when the expected close tag was consumed.
  bool parse_children(WxmlNode& parent, std::string_view close_tag) {
    std::string pending_text;
    size_t text_begin = pos_;
    auto flush_text = [&] {
      std::string_view t = trim(pending_text);
      if (!t.empty()) {
        WxmlNode text;
        text.tag = "#text";
        text.text = std::string(t);
        text.text_bindings = extract_binding_exprs(t);
        text.span = span_from(text_begin);
        finish_span(text, pos_);
        parent.children.push_back(std::move(text));
      }
      pending_text.clear();
    };

    while (!eof()) {
      if (peek() != '<') {
        if (pending_text.empty()) text_begin = pos_;
        pending_text.push_back(src_[pos_++]);
        continue;
      }
      if (lookahead("<!--")) {
        flush_text();
        size_t end = src_.find("-->", pos_ + 4);
        if (end == std::string_view::npos) {
          diagnose("unterminated-comment", "comment not closed before end of input");
          pos_ = src_.size();
        } else {
          pos_ = end + 3;
        }
        continue;
      }
      if (lookahead("</")) {
        flush_text();
        size_t save = pos_;
        pos_ += 2;
        std::string name = read_name();
        skip_ws();
        if (peek() == '>') ++pos_;
        if (!name.empty() && name == close_tag) return true;
        if (name.empty()) {
          diagnose("stray-close-tag", "ignoring empty close tag");
          continue;
        }
        // A close tag for some ancestor (or nothing at all). Hand it back
        // to the enclosing level so intervening elements auto-close.
        if (!close_tag.empty()) {
          pos_ = save;
          diagnose("auto-closed", "element <" + std::string(close_tag) +
                                      "> closed by mismatched </" + name + ">");
          return false;
        }
        diagnose("stray-close-tag", "ignoring unmatched </" + name + ">");
        continue;
      }
      if (!std::isalpha(static_cast<unsigned char>(peek(1)))) {
        // Lone '<' that does not begin a tag: treat as text.
        if (pending_text.empty()) text_begin = pos_;
        pending_text.push_back(src_[pos_++]);
        continue;
      }
      flush_text();
      parse_element(parent);
    }
    flush_text();
    if (!close_tag.empty())
      diagnose("unclosed-tag", "element <" + std::string(close_tag) + "> closed at end of input");
    return false;
  }

  void parse_element(WxmlNode& parent) {
    WxmlNode node;
    node.span = span_from(pos_);
    ++pos_;  // '<'
    node.tag = read_name();
    while (!eof()) {
      skip_ws();
      if (peek() == '>') { ++pos_; break; }
      if (lookahead("/>")) {
        pos_ += 2;
        finish_span(node, pos_);
        parent.children.push_back(std::move(node));
        return;
      }
      if (peek() == '<') {
        diagnose("malformed-tag", "tag <" + node.tag + "> not closed before next tag");
        break;
      }
      std::string name = read_attr_name();
      if (name.empty()) { ++pos_; continue; }
      AttrValue value;
      skip_ws();
      if (peek() == '=') {
        ++pos_;
        skip_ws();
        value.raw = read_attr_value();
      }
      value.bindings = extract_binding_exprs(value.raw);
      node.attrs.emplace_back(std::move(name), std::move(value));
    }
    if (eof()) {
      diagnose("malformed-tag", "tag <" + node.tag + "> truncated at end of input");
      finish_span(node, pos_);
      parent.children.push_back(std::move(node));
      return;
    }
    // Children until our close tag; a mismatched close for an ancestor
    // bubbles up by returning false without consuming it.
    parse_children(node, node.tag);
    finish_span(node, pos_);
    parent.children.push_back(std::move(node));
  }

  std::string read_name() {
    std::string out;
    while (!eof()) {
      char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') {
        out.push_back(c);
        ++pos_;
      } else {
        break;
      }
    }
    return out;
  }

  std::string read_attr_name() {
    std::string out;
    while (!eof()) {
      char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':' ||
          c == '.' || c == '@') {
        out.push_back(c);
        ++pos_;
      } else {
        break;
      }
    }
    return out;
  }

  std::string read_attr_value() {
    std::string out;
    char quote = peek();
    if (quote == '"' || quote == '\'') {
      ++pos_;
      while (!eof() && peek() != quote) out.push_back(src_[pos_++]);
      if (eof())
        diagnose("unterminated-attribute", "attribute value not closed before end of input");
      else
        ++pos_;
      return out;
    }
    while (!eof() && !std::isspace(static_cast<unsigned char>(peek())) && peek() != '>' &&
           !lookahead("/>"))
      out.push_back(src_[pos_++]);
    return out;
  }

  void skip_ws() {
    while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }

  static void assign_xpaths(WxmlNode& node, const std::string& xpath) {
    node.xpath = xpath;
    std::map<std::string, int> seen;
    for (WxmlNode& c : node.children) {
      int index = ++seen[c.tag];
      assign_xpaths(c, xpath + "/" + c.tag + "[" + std::to_string(index) + "]");
    }
  }
};

inline void serialize_node(const WxmlNode& n, std::string& out) {
  if (n.is_text()) {
    out += n.text;
    return;
  }
  out += '<';
  out += n.tag;
  for (const auto& [k, v] : n.attrs) {
    out += ' ';
    out += k;
    out += "=\"";
    out += v.raw;
    out += '"';
  }
  if (n.children.empty()) {
    out += "/>";
    return;
  }
  out += '>';
  for (const WxmlNode& c : n.children) serialize_node(c, out);
  out += "</";
  out += n.tag;
  out += '>';
}

}  // namespace detail

inline WxmlDoc parse_wxml(std::string_view source, const std::string& page) {
  return detail::WxmlParser(source, page).run();
}

// Renders a (sub)tree back to markup. Serializing the synthetic root emits
// only its children. parse(serialize(t)) is structurally equal to t.
inline std::string serialize_wxml(const WxmlNode& node) {
  std::string out;
  if (node.tag == "page" && node.xpath == "/page") {
    for (const WxmlNode& c : node.children) detail::serialize_node(c, out);
  } else {
    detail::serialize_node(node, out);
  }
  return out;
}

// A GUI event wired in markup: attribute bind<event> or catch<event> whose
// value names the handler function. catch* variants are treated the same
// as bind* (the difference is event bubbling, which no analysis here
// depends on).
struct BindCall {
  std::string page;
  std::string widget_xpath;
  std::string event;     // attribute name with the bind/catch prefix stripped
  std::string handler;   // raw attribute value
  std::string attr_name;

  auto operator<=>(const BindCall&) const = default;
};

namespace detail {

inline void collect_bind_calls(const WxmlNode& n, const std::string& page,
                               std::vector<BindCall>& out, Diagnostics& diags) {
  if (!n.is_text()) {
    for (const auto& [name, value] : n.attrs) {
      std::string_view prefix;
      if (name.starts_with("bind") && name.size() > 4) prefix = "bind";
      else if (name.starts_with("catch") && name.size() > 5) prefix = "catch";
      else continue;
      if (!value.bindings.empty()) {
        diags.push_back({"dynamic-handler", "binding expression in handler attribute " + name +
                                               " is not supported", page + ":" + n.xpath});
        continue;
      }
      out.push_back({page, n.xpath, name.substr(prefix.size()), value.raw, name});
    }
  }
  for (const WxmlNode& c : n.children) collect_bind_calls(c, page, out, diags);
}

}  // namespace detail

inline std::vector<BindCall> extract_bind_calls(const WxmlDoc& doc,
                                                Diagnostics* diags = nullptr) {
  std::vector<BindCall> out;
  Diagnostics local;
  detail::collect_bind_calls(doc.root, doc.page, out, diags ? *diags : local);
  return out;
}

// One {{...}} occurrence: which widget and attribute it appears in, and
// the inner expression. Text-run bindings are attributed to the enclosing
// element under the pseudo attribute "#text".
struct DataBindingRef {
  std::string widget_xpath;
  std::string attr_name;
  std::string expr;

  auto operator<=>(const DataBindingRef&) const = default;
};

namespace detail {

inline void collect_data_bindings(const WxmlNode& n, std::vector<DataBindingRef>& out) {
  for (const auto& [name, value] : n.attrs)
    for (const std::string& expr : value.bindings) out.push_back({n.xpath, name, expr});
  for (const WxmlNode& c : n.children) {
    if (c.is_text()) {
      for (const std::string& expr : c.text_bindings) out.push_back({n.xpath, "#text", expr});
    } else {
      collect_data_bindings(c, out);
    }
  }
}

}  // namespace detail

inline std::vector<DataBindingRef> extract_data_bindings(const WxmlDoc& doc) {
  std::vector<DataBindingRef> out;
  detail::collect_data_bindings(doc.root, out);
  return out;
}

inline const WxmlNode* find_by_xpath(const WxmlNode& root, std::string_view xpath) {
  if (root.xpath == xpath) return &root;
  for (const WxmlNode& c : root.children) {
    if (xpath.starts_with(c.xpath) &&
        (xpath.size() == c.xpath.size() || xpath[c.xpath.size()] == '/')) {
      if (const WxmlNode* hit = find_by_xpath(c, xpath)) return hit;
    }
  }
  return nullptr;
}

// Concatenated direct text of an element with binding regions removed and
// whitespace collapsed; the "text" key attribute for widget matching.
inline std::string static_text(const WxmlNode& n) {
  std::string joined;
  for (const WxmlNode& c : n.children)
    if (c.is_text()) {
      if (!joined.empty()) joined += ' ';
      joined += strip_binding_regions(c.text);
    }
  return std::string(trim(joined));
}

}  // namespace miniscope
