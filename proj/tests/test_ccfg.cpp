#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "miniscope/ccfg.hpp"
#include "miniscope/mdg.hpp"
#include "miniscope/package.hpp"
#include "support/temp_dir.hpp"

using miniscope::AstGraph;
using miniscope::BindCall;
using miniscope::CcfgEdge;
using miniscope::EntryEvent;
using miniscope::ExCall;
using miniscope::ImportMap;

namespace {

const std::string kFixtureRoot = MINISCOPE_FIXTURE_DIR;

const char* kInstallerModule =
    "function init(pageContext) {\n"
    "  pageContext.onShutterTap = function () {\n"
    "    var camera = wx.createCameraContext();\n"
    "  };\n"
    "}\n"
    "module.exports = { init: init };\n";

BindCall shutter_bind(const std::string& page) {
  return {page, "/page/button[1]", "tap", "onShutterTap", "bindtap"};
}

// Page script calling into the shared module; the call argument list is
// the varying part of the cross-file callback tests.
AstGraph verify_page_ast(const std::string& call_args) {
  std::string src = "var util = require(\"../../util/util.js\");\n"
                    "Page({ onReady: function () { util.init(" + call_args + "); } });\n";
  return miniscope::parse_js(src, "checkID/pages/verify/verify.js");
}

miniscope::Mdg complete_fixture_mdg() {
  miniscope::MiniAppPackage pkg = miniscope::load_package(kFixtureRoot + "/idcheck");
  pkg = miniscope::merge_subpackage(pkg, "checkID", kFixtureRoot + "/idcheck/checkID");
  return miniscope::build_mdg(pkg);
}

}  // namespace

TEST_CASE("imports and require declarators resolve relative to the importer") {
  AstGraph req = miniscope::parse_js("const util = require('../util/util.js');",
                                     "pages/takePhoto/takePhoto.js");
  ImportMap m = miniscope::get_imported_modules(req);
  REQUIRE(m.size() == 1);
  CHECK(m.at("util") == "pages/util/util.js");

  AstGraph imp = miniscope::parse_js("import {init} from './helpers.js';",
                                     "pages/takePhoto/takePhoto.js");
  ImportMap m2 = miniscope::get_imported_modules(imp);
  REQUIRE(m2.size() == 1);
  CHECK(m2.at("init") == "pages/takePhoto/helpers.js");

  AstGraph none = miniscope::parse_js("var x = 1;", "pages/a/a.js");
  CHECK(miniscope::get_imported_modules(none).empty());
}

TEST_CASE("non-literal require arguments are skipped with a diagnostic") {
  AstGraph g = miniscope::parse_js("const m = require(moduleName);", "pages/a/a.js");
  miniscope::Diagnostics diags;
  CHECK(miniscope::get_imported_modules(g, &diags).empty());
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].code == "non-literal-require");
}

TEST_CASE("context passed into a module surfaces bound markup handlers") {
  AstGraph page = verify_page_ast("this");
  ImportMap imports = miniscope::get_imported_modules(page);
  std::map<std::string, AstGraph> modules;
  modules.emplace("checkID/util/util.js",
                  miniscope::parse_js(kInstallerModule, "checkID/util/util.js"));

  std::vector<ExCall> calls = miniscope::get_crossfile_callbacks(
      page, imports, {shutter_bind("checkID/pages/verify/verify")}, modules);
  REQUIRE(calls.size() == 1);
  CHECK(calls[0].handler_name == "onShutterTap");
  CHECK(calls[0].defining_file == "checkID/util/util.js");
  CHECK(calls[0].installer_fn == "init");
  CHECK(calls[0].installer_file == "checkID/pages/verify/verify.js");

  // The installer call really carries a `this` argument.
  const miniscope::AstNode& call = page.node(calls[0].installer_call);
  REQUIRE(call.kind == miniscope::AstKind::CallExpression);
  bool has_this = false;
  for (const miniscope::AstNode* arg : page.children_of(call, miniscope::AstRole::Argument))
    if (arg->kind == miniscope::AstKind::ThisExpression) has_this = true;
  CHECK(has_this);

  // The installed body is the function assigned inside the module.
  const AstGraph& mod = modules.at("checkID/util/util.js");
  CHECK(mod.node(calls[0].defining_node_id).kind == miniscope::AstKind::FunctionDef);
}

TEST_CASE("handlers the markup never binds are not cross-file callbacks") {
  AstGraph page = verify_page_ast("this");
  ImportMap imports = miniscope::get_imported_modules(page);
  std::map<std::string, AstGraph> modules;
  modules.emplace("checkID/util/util.js",
                  miniscope::parse_js(kInstallerModule, "checkID/util/util.js"));
  CHECK(miniscope::get_crossfile_callbacks(page, imports, {}, modules).empty());
}

TEST_CASE("calls without a this argument install nothing") {
  AstGraph page = verify_page_ast("");
  ImportMap imports = miniscope::get_imported_modules(page);
  std::map<std::string, AstGraph> modules;
  modules.emplace("checkID/util/util.js",
                  miniscope::parse_js(kInstallerModule, "checkID/util/util.js"));
  CHECK(miniscope::get_crossfile_callbacks(
            page, imports, {shutter_bind("checkID/pages/verify/verify")}, modules)
            .empty());
}

TEST_CASE("entry points combine lifecycle methods and markup bindings") {
  AstGraph page = miniscope::parse_js(
      "Page({ onReady: function () {}, helper: function () {} });", "pages/takePhoto/takePhoto.js");
  auto entries =
      miniscope::find_entry_points(page, "pages/takePhoto/takePhoto",
                                   {shutter_bind("pages/takePhoto/takePhoto")});
  REQUIRE(entries.size() == 2);
  const EntryEvent* lifecycle = nullptr;
  const EntryEvent* gui = nullptr;
  for (const EntryEvent& e : entries)
    (e.kind == EntryEvent::Kind::Lifecycle ? lifecycle : gui) = &e;
  REQUIRE(lifecycle != nullptr);
  CHECK(lifecycle->lifecycle == "onReady");
  REQUIRE(gui != nullptr);
  CHECK(gui->handler == "onShutterTap");
  CHECK(gui->pending_dynamic);  // no static method of that name
  CHECK(gui->bind.event == "tap");
}

TEST_CASE("app registration yields app-level lifecycle entries") {
  AstGraph app = miniscope::parse_js("App({ onLaunch: function () {} });", "app.js");
  auto entries = miniscope::find_entry_points(app, "", {});
  REQUIRE(entries.size() == 1);
  CHECK(entries[0].kind == EntryEvent::Kind::Lifecycle);
  CHECK(entries[0].lifecycle == "onLaunch");
  CHECK(entries[0].page.empty());
}

TEST_CASE("empty registrations produce no entries") {
  AstGraph page = miniscope::parse_js("Page({});", "pages/a/a.js");
  CHECK(miniscope::find_entry_points(page, "pages/a/a", {}).empty());
}

TEST_CASE("lifecycle names are the six platform stages") {
  const std::set<std::string>& names = miniscope::lifecycle_names();
  CHECK(names == std::set<std::string>{"onLaunch", "onShow", "onHide", "onLoad", "onReady",
                                       "onUnload"});
}

TEST_CASE("call graph links the dynamic definition chain end to end") {
  miniscope::Mdg m = complete_fixture_mdg();
  const miniscope::Ccfg& ccfg = m.ccfg;

  int on_ready = ccfg.find_function("checkID/pages/verify/verify.js", "onReady");
  int init_fn = ccfg.find_function("checkID/util/util.js", "init");
  REQUIRE(on_ready >= 0);
  REQUIRE(init_fn >= 0);

  bool direct = false, dynamic = false;
  int shutter_fn = -1;
  for (const CcfgEdge& e : ccfg.edges) {
    if (e.kind == CcfgEdge::Kind::DirectCall && e.from_fn == on_ready && e.to_fn == init_fn)
      direct = true;
    if (e.kind == CcfgEdge::Kind::DynamicDefinition && e.from_fn == init_fn) {
      dynamic = true;
      shutter_fn = e.to_fn;
    }
  }
  CHECK(direct);
  REQUIRE(dynamic);
  CHECK(ccfg.functions[static_cast<size_t>(shutter_fn)].name == "onShutterTap");
  CHECK(ccfg.functions[static_cast<size_t>(shutter_fn)].file == "checkID/util/util.js");

  // The markup's tap entry resolves to that same dynamically installed body.
  bool gui_to_shutter = false;
  for (const CcfgEdge& e : ccfg.edges)
    if (e.kind == CcfgEdge::Kind::GuiEvent && e.to_fn == shutter_fn) gui_to_shutter = true;
  CHECK(gui_to_shutter);
}

TEST_CASE("statically bound handlers get gui-event edges") {
  miniscope::Mdg m = complete_fixture_mdg();
  int nav = m.ccfg.find_function("pages/myInfo/myInfo.js", "navToCheckID");
  REQUIRE(nav >= 0);
  bool found = false;
  for (const CcfgEdge& e : m.ccfg.edges)
    if (e.kind == CcfgEdge::Kind::GuiEvent && e.to_fn == nav) {
      found = true;
      const EntryEvent& entry = m.ccfg.entries[static_cast<size_t>(e.entry)];
      CHECK(entry.bind.handler == "navToCheckID");
      CHECK(entry.bind.event == "tap");
    }
  CHECK(found);
}

TEST_CASE("unused page functions keep in-degree zero") {
  miniscope::Mdg m = complete_fixture_mdg();
  int unused = m.ccfg.find_function("checkID/pages/verify/verify.js", "getMyLocation");
  REQUIRE(unused >= 0);
  for (const CcfgEdge& e : m.ccfg.edges) CHECK(e.to_fn != unused);
}

TEST_CASE("every markup binding surfaces as a gui entry") {
  miniscope::Mdg m = complete_fixture_mdg();
  std::set<BindCall> bound;
  for (const auto& [page, calls] : m.bind_calls)
    for (const BindCall& bc : calls) bound.insert(bc);
  std::set<BindCall> entries;
  for (const EntryEvent& e : m.ccfg.entries)
    if (e.kind == EntryEvent::Kind::Gui) entries.insert(e.bind);
  CHECK(bound == entries);
}

TEST_CASE("installed handlers always correspond to markup bindings") {
  miniscope::Mdg m = complete_fixture_mdg();
  REQUIRE_FALSE(m.ccfg.ex_calls.empty());
  for (const ExCall& ex : m.ccfg.ex_calls) {
    std::string page = ex.installer_file.substr(0, ex.installer_file.size() - 3);
    auto it = m.bind_calls.find(page);
    REQUIRE(it != m.bind_calls.end());
    bool bound = std::any_of(it->second.begin(), it->second.end(),
                             [&](const BindCall& bc) { return bc.handler == ex.handler_name; });
    CHECK(bound);
  }
}

TEST_CASE("bindings no code can satisfy are reported, not dropped") {
  testsupport::TempDir dir;
  testsupport::write_tree(
      dir.path(), {{"app.json", R"({"pages": ["pages/a/a"]})"},
                   {"pages/a/a.wxml", "<button bindtap=\"ghost\">x</button>"},
                   {"pages/a/a.js", "Page({ onLoad: function () {} });"}});
  miniscope::Mdg m = miniscope::build_mdg(miniscope::load_package(dir.path()));
  bool flagged = std::any_of(m.ccfg.diagnostics.begin(), m.ccfg.diagnostics.end(),
                             [](const miniscope::Diagnostic& d) {
                               return d.code == "unresolved-handler" &&
                                      d.message.find("ghost") != std::string::npos;
                             });
  CHECK(flagged);
  // The entry itself is still visible for inspection.
  bool entry_present = false;
  for (const EntryEvent& e : m.ccfg.entries)
    if (e.kind == EntryEvent::Kind::Gui && e.handler == "ghost") entry_present = true;
  CHECK(entry_present);
}
