#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "miniscope/js_ast.hpp"

using miniscope::AstGraph;
using miniscope::AstKind;
using miniscope::AstNode;
using miniscope::AstRole;

namespace {

const AstNode* first_of(const AstGraph& g, AstKind kind) {
  for (const AstNode& n : g.nodes)
    if (n.kind == kind) return &n;
  return nullptr;
}

// Tree shape: one root, every other node has exactly one parent, ids are
// preorder positions and subtrees occupy contiguous id ranges.
void check_tree_shape(const AstGraph& g) {
  REQUIRE_FALSE(g.nodes.empty());
  CHECK(g.node(g.root()).kind == AstKind::Program);
  CHECK(g.edges.size() == g.nodes.size() - 1);
  std::map<int, int> parents;
  for (const miniscope::AstEdge& e : g.edges) ++parents[e.child];
  CHECK(parents.count(g.root()) == 0);
  for (const AstNode& n : g.nodes) {
    CHECK(n.id == (&n - g.nodes.data()));
    if (n.id != g.root()) CHECK(parents[n.id] == 1);
    for (const miniscope::AstChild& c : n.children) {
      CHECK(c.id > n.id);
      CHECK(g.node(c.id).subtree_end <= n.subtree_end);
    }
  }
}

}  // namespace

TEST_CASE("require declarations expose callee and argument") {
  AstGraph g = miniscope::parse_js("const util = require('../util/util.js');", "pages/a/a.js");
  check_tree_shape(g);
  const AstNode* decl = first_of(g, AstKind::VariableDeclarator);
  REQUIRE(decl != nullptr);
  const AstNode* id = g.child(*decl, AstRole::Id);
  REQUIRE(id != nullptr);
  CHECK(id->str_value == "util");
  const AstNode* init = g.child(*decl, AstRole::Init);
  REQUIRE(init != nullptr);
  REQUIRE(init->kind == AstKind::CallExpression);
  const AstNode* callee = g.child(*init, AstRole::Callee);
  REQUIRE(callee != nullptr);
  CHECK(callee->kind == AstKind::Identifier);
  CHECK(callee->str_value == "require");
  auto args = g.children_of(*init, AstRole::Argument);
  REQUIRE(args.size() == 1);
  CHECK(args[0]->kind == AstKind::StringLiteral);
  CHECK(args[0]->str_value == "../util/util.js");
}

TEST_CASE("page registration yields an object literal of methods") {
  AstGraph g = miniscope::parse_js(
      "Page({ onLoad(){}, navToCheckID(){ wx.navigateTo({url:'/pages/checkID/index'}) } });",
      "pages/a/a.js");
  check_tree_shape(g);
  auto reg = miniscope::find_registration(g);
  REQUIRE(reg.has_value());
  CHECK(reg->registrar == "Page");
  const AstNode& object = g.node(reg->object_node);
  REQUIRE(object.kind == AstKind::ObjectLiteral);
  auto props = g.children_of(object, AstRole::Property);
  REQUIRE(props.size() == 2);
  CHECK(props[0]->str_value == "onLoad");
  CHECK(props[1]->str_value == "navToCheckID");

  // The navigation call sits inside the second method.
  const AstNode* nav = nullptr;
  for (const AstNode& n : g.nodes)
    if (n.kind == AstKind::CallExpression && n.id != reg->call_node &&
        miniscope::member_path(g, g.child(n, AstRole::Callee)->id) == "wx.navigateTo")
      nav = &n;
  REQUIRE(nav != nullptr);
  CHECK(g.child(*nav, AstRole::Callee)->kind == AstKind::MemberExpression);
  const AstNode* method = g.child(*props[1], AstRole::Value);
  REQUIRE(method != nullptr);
  CHECK(method->kind == AstKind::FunctionDef);
  CHECK(g.in_subtree(nav->id, method->id));
}

TEST_CASE("imports carry specifier and source children") {
  AstGraph g = miniscope::parse_js("import util from './util.js';", "pages/a/a.js");
  const AstNode* imp = first_of(g, AstKind::ImportDeclaration);
  REQUIRE(imp != nullptr);
  const AstNode* spec = g.child(*imp, AstRole::Specifier);
  const AstNode* source = g.child(*imp, AstRole::Source);
  REQUIRE(spec != nullptr);
  REQUIRE(source != nullptr);
  CHECK(spec->str_value == "util");
  CHECK(source->str_value == "./util.js");
}

TEST_CASE("unsupported statements degrade to opaque nodes") {
  AstGraph g = miniscope::parse_js("1 +", "pages/a/a.js");
  check_tree_shape(g);
  REQUIRE_FALSE(g.node(0).children.empty());
  bool has_other = false;
  for (const AstNode& n : g.nodes)
    if (n.kind == AstKind::Other) has_other = true;
  CHECK(has_other);
}

TEST_CASE("only unbalanced brackets are fatal") {
  CHECK_NOTHROW(miniscope::parse_js("switch (x) { default: y(); }", "a.js"));
  try {
    miniscope::parse_js("function f() {", "a.js");
    FAIL("expected ParseError");
  } catch (const miniscope::Error& e) {
    CHECK(e.code() == miniscope::ErrorCode::ParseError);
  }
}

TEST_CASE("every node is exactly an operator or an operand") {
  CHECK(miniscope::node_prop(AstKind::Identifier) == miniscope::NodeProp::Operand);
  CHECK(miniscope::node_prop(AstKind::StringLiteral) == miniscope::NodeProp::Operand);
  CHECK(miniscope::node_prop(AstKind::NumberLiteral) == miniscope::NodeProp::Operand);
  CHECK(miniscope::node_prop(AstKind::ThisExpression) == miniscope::NodeProp::Operand);
  CHECK(miniscope::node_prop(AstKind::CallExpression) == miniscope::NodeProp::Operator);
  CHECK(miniscope::node_prop(AstKind::Program) == miniscope::NodeProp::Operator);
}

TEST_CASE("member paths reconstruct dotted chains") {
  AstGraph g = miniscope::parse_js(
      "this.data.x = wx.createCameraContext(); var y = arr[i];", "a.js");
  const AstNode* assign = first_of(g, AstKind::Assignment);
  REQUIRE(assign != nullptr);
  CHECK(miniscope::member_path(g, g.child(*assign, AstRole::Left)->id) == "this.data.x");
  const AstNode* call = first_of(g, AstKind::CallExpression);
  REQUIRE(call != nullptr);
  CHECK(miniscope::member_path(g, g.child(*call, AstRole::Callee)->id) == "wx.createCameraContext");
}

TEST_CASE("named function discovery covers the definition forms") {
  AstGraph g = miniscope::parse_js(
      "function init(pageContext) { pageContext.onShutterTap = function () {}; }\n"
      "var helper = function (a, b) {};\n"
      "module.exports = { init: init, run: function(x) {} };",
      "util.js");
  auto fns = miniscope::named_functions(g);
  std::map<std::string, miniscope::NamedFunction> by_name;
  for (const auto& f : fns) by_name[f.name] = f;
  REQUIRE(by_name.count("init") == 1);
  CHECK(by_name["init"].params == std::vector<std::string>{"pageContext"});
  REQUIRE(by_name.count("helper") == 1);
  CHECK(by_name["helper"].params == std::vector<std::string>{"a", "b"});
  REQUIRE(by_name.count("onShutterTap") == 1);
  REQUIRE(by_name.count("run") == 1);

  // First definition of a name wins.
  AstGraph dup = miniscope::parse_js("function f(a) {}\nvar f = function (b) {};", "d.js");
  auto dup_fns = miniscope::named_functions(dup);
  int count = 0;
  for (const auto& f : dup_fns)
    if (f.name == "f") {
      ++count;
      CHECK(f.params == std::vector<std::string>{"a"});
    }
  CHECK(count == 1);
}

TEST_CASE("registration lookup ignores modules without one") {
  AstGraph g = miniscope::parse_js("function init() {} module.exports = { init: init };", "u.js");
  CHECK_FALSE(miniscope::find_registration(g).has_value());
  AstGraph app = miniscope::parse_js("App({ onLaunch: function () {} });", "app.js");
  auto reg = miniscope::find_registration(app);
  REQUIRE(reg.has_value());
  CHECK(reg->registrar == "App");
}

TEST_CASE("tree shape holds across a spread of sources") {
  const char* sources[] = {
      "",
      "var a = 1;",
      "if (a) { b(); } else { c(); }",
      "Page({ data: { x: '' }, onShow: function () { this.setData({ x: '1' }); } });",
      "const t = cond ? 'a' : 'b'; foo(t, 1 + 2);",
      "import x from './x.js'; export default x;",
  };
  for (const char* src : sources) {
    INFO(src);
    check_tree_shape(miniscope::parse_js(src, "t.js"));
  }
}

TEST_CASE("enclosing function lookup walks to the nearest definition") {
  AstGraph g = miniscope::parse_js(
      "function outer() { function inner() { wx.getLocation({}); } }", "a.js");
  const AstNode* call = nullptr;
  for (const AstNode& n : g.nodes)
    if (n.kind == AstKind::CallExpression) call = &n;
  REQUIRE(call != nullptr);
  int fn = g.enclosing_function(call->id);
  REQUIRE(fn >= 0);
  CHECK(g.node(fn).str_value == "inner");
}
