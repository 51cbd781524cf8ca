#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "miniscope/wxml.hpp"

using miniscope::BindCall;
using miniscope::DataBindingRef;
using miniscope::WxmlDoc;
using miniscope::WxmlNode;

namespace {

// Structural equality: tags, attribute order and raw values, bindings,
// and non-whitespace text, recursively. Spans are allowed to differ.
bool same_shape(const WxmlNode& a, const WxmlNode& b) {
  if (a.tag != b.tag || a.xpath != b.xpath) return false;
  if (a.is_text())
    return miniscope::trim(a.text) == miniscope::trim(b.text) && a.text_bindings == b.text_bindings;
  if (a.attrs.size() != b.attrs.size() || a.children.size() != b.children.size()) return false;
  for (size_t i = 0; i < a.attrs.size(); ++i)
    if (a.attrs[i].first != b.attrs[i].first || !(a.attrs[i].second == b.attrs[i].second))
      return false;
  for (size_t i = 0; i < a.children.size(); ++i)
    if (!same_shape(a.children[i], b.children[i])) return false;
  return true;
}

void collect_xpaths(const WxmlNode& n, std::vector<std::string>& out) {
  if (!n.is_text()) out.push_back(n.xpath);
  for (const WxmlNode& c : n.children) collect_xpaths(c, out);
}

}  // namespace

TEST_CASE("attribute binding regions are extracted") {
  WxmlDoc doc = miniscope::parse_wxml(
      "<navigator url=\"{{takePhotoPath}}\">View photo</navigator>", "pages/myInfo/myInfo");
  CHECK(doc.diagnostics.empty());
  REQUIRE(doc.root.children.size() == 1);
  const WxmlNode& nav = doc.root.children[0];
  CHECK(nav.tag == "navigator");
  const miniscope::AttrValue* url = nav.attr("url");
  REQUIRE(url != nullptr);
  CHECK(url->raw == "{{takePhotoPath}}");
  CHECK(url->bindings == std::vector<std::string>{"takePhotoPath"});
}

TEST_CASE("plain handler attributes carry no bindings") {
  WxmlDoc doc = miniscope::parse_wxml("<button bindtap=\"handleTap\">Click me</button>", "pages/a/a");
  REQUIRE(doc.root.children.size() == 1);
  const WxmlNode& button = doc.root.children[0];
  CHECK(button.tag == "button");
  REQUIRE(button.attr("bindtap") != nullptr);
  CHECK(button.attr("bindtap")->raw == "handleTap");
  CHECK(button.attr("bindtap")->bindings.empty());
  CHECK(miniscope::static_text(button) == "Click me");
}

TEST_CASE("empty input parses to a bare root") {
  WxmlDoc doc = miniscope::parse_wxml("", "pages/a/a");
  CHECK(doc.root.tag == "page");
  CHECK(doc.root.xpath == "/page");
  CHECK(doc.root.children.empty());
  CHECK(doc.diagnostics.empty());
}

TEST_CASE("xpaths extend the parent path with per-tag indices and stay unique") {
  WxmlDoc doc = miniscope::parse_wxml(
      "<view><button>a</button><view/><button>b</button></view><view/>", "pages/a/a");
  const WxmlNode& outer = doc.root.children[0];
  CHECK(outer.xpath == "/page/view[1]");
  CHECK(outer.children[0].xpath == "/page/view[1]/button[1]");
  CHECK(outer.children[1].xpath == "/page/view[1]/view[1]");
  CHECK(outer.children[2].xpath == "/page/view[1]/button[2]");
  CHECK(doc.root.children[1].xpath == "/page/view[2]");

  std::vector<std::string> xpaths;
  collect_xpaths(doc.root, xpaths);
  std::set<std::string> unique(xpaths.begin(), xpaths.end());
  CHECK(unique.size() == xpaths.size());

  const WxmlNode* hit = miniscope::find_by_xpath(doc.root, "/page/view[1]/button[2]");
  REQUIRE(hit != nullptr);
  CHECK(miniscope::static_text(*hit) == "b");
  CHECK(miniscope::find_by_xpath(doc.root, "/page/view[9]") == nullptr);
}

TEST_CASE("attributes keep their source order") {
  WxmlDoc doc = miniscope::parse_wxml(
      "<input placeholder=\"ID\" bindinput=\"onInput\" name=\"id\"/>", "pages/a/a");
  const WxmlNode& input = doc.root.children[0];
  REQUIRE(input.attrs.size() == 3);
  CHECK(input.attrs[0].first == "placeholder");
  CHECK(input.attrs[1].first == "bindinput");
  CHECK(input.attrs[2].first == "name");
}

TEST_CASE("unclosed tags recover at end of input with a diagnostic") {
  WxmlDoc doc = miniscope::parse_wxml("<view><button>go", "pages/a/a");
  REQUIRE_FALSE(doc.diagnostics.empty());
  REQUIRE(doc.root.children.size() == 1);
  REQUIRE(doc.root.children[0].children.size() == 1);
  CHECK(doc.root.children[0].children[0].tag == "button");
}

TEST_CASE("serialization round-trips structurally") {
  const char* source =
      "<view class=\"container\"><navigator url=\"{{takePhotoPath}}\">View photo</navigator>"
      "<button bindtap=\"navToCheckID\">Verify identity</button>"
      "<view wx:for=\"{{items}}\">{{item.name}}</view></view>";
  WxmlDoc first = miniscope::parse_wxml(source, "pages/a/a");
  std::string rendered = miniscope::serialize_wxml(first.root);
  WxmlDoc second = miniscope::parse_wxml(rendered, "pages/a/a");
  CHECK(same_shape(first.root, second.root));
}

TEST_CASE("bind and catch attributes become bind calls") {
  WxmlDoc doc = miniscope::parse_wxml(
      "<button bindtap=\"onShutterTap\">Take photo</button>"
      "<input bindinput=\"onInput\"/>"
      "<view catchtap=\"stopHere\"/>",
      "checkID/pages/verify/verify");
  std::vector<BindCall> calls = miniscope::extract_bind_calls(doc);
  REQUIRE(calls.size() == 3);
  CHECK(calls[0].event == "tap");
  CHECK(calls[0].handler == "onShutterTap");
  CHECK(calls[0].attr_name == "bindtap");
  CHECK(calls[0].page == "checkID/pages/verify/verify");
  CHECK(calls[0].widget_xpath == "/page/button[1]");
  CHECK(calls[1].event == "input");
  CHECK(calls[1].handler == "onInput");
  CHECK(calls[2].event == "tap");
  CHECK(calls[2].handler == "stopHere");
  CHECK(calls[2].attr_name == "catchtap");

  // The markup really carries what each call claims.
  for (const BindCall& c : calls) {
    const WxmlNode* w = miniscope::find_by_xpath(doc.root, c.widget_xpath);
    REQUIRE(w != nullptr);
    REQUIRE(w->attr(c.attr_name) != nullptr);
    CHECK(w->attr(c.attr_name)->raw == c.handler);
  }
}

TEST_CASE("markup without handler attributes yields no bind calls") {
  WxmlDoc doc = miniscope::parse_wxml("<view><image src=\"a.png\"/></view>", "pages/a/a");
  CHECK(miniscope::extract_bind_calls(doc).empty());
}

TEST_CASE("dynamic handler expressions are rejected with a diagnostic") {
  WxmlDoc doc = miniscope::parse_wxml("<button bindtap=\"{{chosen}}\"/>", "pages/a/a");
  miniscope::Diagnostics diags;
  std::vector<BindCall> calls = miniscope::extract_bind_calls(doc, &diags);
  CHECK(calls.empty());
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].code == "dynamic-handler");
}

TEST_CASE("data bindings cover attributes and text runs") {
  WxmlDoc doc = miniscope::parse_wxml(
      "<navigator url=\"{{takePhotoPath}}\">go</navigator>"
      "<view>{{message}}</view>"
      "<image src=\"/static/logo.png\"/>",
      "pages/a/a");
  std::vector<DataBindingRef> refs = miniscope::extract_data_bindings(doc);
  REQUIRE(refs.size() == 2);
  CHECK(refs[0] == DataBindingRef{"/page/navigator[1]", "url", "takePhotoPath"});
  CHECK(refs[1] == DataBindingRef{"/page/view[1]", "#text", "message"});
}

TEST_CASE("binding region scanning handles multiple and unterminated regions") {
  CHECK(miniscope::extract_binding_exprs("{{ a.b }} and {{c}}") ==
        std::vector<std::string>{"a.b", "c"});
  CHECK(miniscope::extract_binding_exprs("no regions").empty());
  CHECK(miniscope::extract_binding_exprs("{{open").empty());
  CHECK(miniscope::strip_binding_regions("x{{a}}y{{b}}z") == "xyz");
  CHECK(miniscope::strip_binding_regions("x{{open") == "x{{open");
  CHECK(miniscope::is_dotted_path("item.name"));
  CHECK(miniscope::is_dotted_path("takePhotoPath"));
  CHECK_FALSE(miniscope::is_dotted_path("a + b"));
  CHECK_FALSE(miniscope::is_dotted_path("a."));
  CHECK_FALSE(miniscope::is_dotted_path(""));
}
