#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>

#include "miniscope/mdg.hpp"
#include "support/package_gen.hpp"
#include "support/temp_dir.hpp"

using miniscope::Mdg;
using miniscope::MdgEdge;
using miniscope::TransitionEdge;
using miniscope::TransitionPath;

namespace {

const std::string kFixtureRoot = MINISCOPE_FIXTURE_DIR;

Mdg build(const std::map<std::string, std::string>& files) {
  testsupport::TempDir dir;
  testsupport::write_tree(dir.path(), files);
  return miniscope::build_mdg(miniscope::load_package(dir.path()));
}

Mdg fixture_main() { return miniscope::build_mdg(miniscope::load_package(kFixtureRoot + "/idcheck")); }

Mdg fixture_complete() {
  miniscope::MiniAppPackage pkg = miniscope::load_package(kFixtureRoot + "/idcheck");
  pkg = miniscope::merge_subpackage(pkg, "checkID", kFixtureRoot + "/idcheck/checkID");
  return miniscope::build_mdg(pkg);
}

// The merge contract, recomputed from the layers: per-script AST node
// sets with the page-script roots renamed, all declared pages, and the
// placeholders that survived resolution.
std::set<std::string> expected_nodes(const Mdg& m) {
  std::set<std::string> loaded_pages;
  for (const std::string& p : miniscope::list_pages(m.pkg, miniscope::PageScope::Loaded))
    loaded_pages.insert(p);

  std::set<std::string> want;
  for (const auto& [file, ast] : m.asts) {
    std::string stem = file.substr(0, file.size() - 3);
    bool page_script = file.ends_with(".js") && loaded_pages.count(stem);
    for (const miniscope::AstNode& n : ast.nodes) {
      if (n.id == 0 && page_script)
        want.insert("page:" + stem);
      else
        want.insert(file + "#" + std::to_string(n.id));
    }
  }
  for (const std::string& p : m.utg.pages) want.insert("page:" + p);
  for (const TransitionEdge& e : m.utg.edges)
    if (e.placeholder && e.target.empty())
      want.insert("ph:" + e.placeholder->page + ":" + e.placeholder->var_name);
  return want;
}

void check_merge_invariants(const Mdg& m) {
  auto ids = miniscope::mdg_node_ids(m);
  std::set<std::string> got(ids.begin(), ids.end());
  CHECK(got.size() == ids.size());
  CHECK(got == expected_nodes(m));

  static const std::set<std::string> kLayers = {"ast", "utg", "ccfg", "udfg"};
  std::map<std::string, size_t> ast_children_per_file;
  std::set<std::string> ast_child_ids;
  for (const MdgEdge& e : miniscope::mdg_edges(m)) {
    REQUIRE(kLayers.count(e.layer) == 1);
    if (e.layer == "udfg") {
      CHECK(e.from.starts_with("data:"));
      CHECK(e.to.starts_with("data:"));
      CHECK(got.count(e.from) == 0);  // data objects live beside the node set
    } else {
      CHECK(got.count(e.from) == 1);
      if (e.to != miniscope::kBackTarget) CHECK(got.count(e.to) == 1);
    }
    if (e.layer == "ast") {
      auto hash = e.to.rfind('#');
      REQUIRE(hash != std::string::npos);
      ast_children_per_file[e.to.substr(0, hash)]++;
      // Unique parent: the AST layer alone is a forest of file trees.
      CHECK(ast_child_ids.insert(e.to).second);
    }
  }
  for (const auto& [file, ast] : m.asts)
    CHECK(ast_children_per_file[file] == ast.nodes.size() - 1);
}

// All simple forward routes launch -> target, up to a step budget.
void simple_paths(const std::map<std::string, std::vector<const TransitionEdge*>>& adj,
                  const std::string& cur, const std::string& target, std::set<std::string>& on_path,
                  size_t depth, size_t budget, std::vector<size_t>& lengths) {
  if (cur == target) {
    lengths.push_back(depth);
    return;
  }
  if (depth == budget) return;
  auto it = adj.find(cur);
  if (it == adj.end()) return;
  for (const TransitionEdge* e : it->second) {
    if (!on_path.insert(e->target).second) continue;
    simple_paths(adj, e->target, target, on_path, depth + 1, budget, lengths);
    on_path.erase(e->target);
  }
}

size_t shortest_route_oracle(const Mdg& m, const std::string& target) {
  std::map<std::string, std::vector<const TransitionEdge*>> adj;
  for (const TransitionEdge& e : m.utg.edges)
    if (!e.target.empty() && e.target != miniscope::kBackTarget) adj[e.from_page].push_back(&e);
  std::vector<size_t> lengths;
  std::set<std::string> on_path = {m.pkg.launch_page()};
  simple_paths(adj, m.pkg.launch_page(), target, on_path, 0, 6, lengths);
  REQUIRE_FALSE(lengths.empty());
  return *std::min_element(lengths.begin(), lengths.end());
}

}  // namespace

TEST_CASE("node identities stay textual and phase-stable") {
  Mdg m = fixture_complete();
  auto ids = miniscope::mdg_node_ids(m);
  std::set<std::string> got(ids.begin(), ids.end());

  CHECK(got.count("page:pages/myInfo/myInfo") == 1);
  CHECK(got.count("page:checkID/pages/verify/verify") == 1);
  // A page script's root is the page node itself, never file#0.
  CHECK(got.count("pages/myInfo/myInfo.js#0") == 0);
  // Shared modules are not pages; their roots keep plain file refs.
  CHECK(got.count("checkID/util/util.js#0") == 1);
}

TEST_CASE("the merged node set is the layer union on the fixture") {
  check_merge_invariants(fixture_main());
  check_merge_invariants(fixture_complete());
}

TEST_CASE("the complete phase is a superset of the main phase") {
  Mdg main_only = fixture_main();
  Mdg complete = fixture_complete();
  CHECK(main_only.phase == "main-only");
  CHECK(complete.phase == "complete");

  auto main_ids = miniscope::mdg_node_ids(main_only);
  auto complete_ids = miniscope::mdg_node_ids(complete);
  CHECK(std::includes(complete_ids.begin(), complete_ids.end(), main_ids.begin(), main_ids.end()));
  CHECK(complete_ids.size() > main_ids.size());

  auto main_edges = miniscope::mdg_edges(main_only);
  auto complete_edges = miniscope::mdg_edges(complete);
  CHECK(std::includes(complete_edges.begin(), complete_edges.end(), main_edges.begin(),
                      main_edges.end()));
}

TEST_CASE("serialization carries data objects beside the node set") {
  Mdg m = fixture_complete();
  nlohmann::json j = miniscope::to_json(m);
  REQUIRE(j.contains("data_objects"));
  CHECK(j["phase"] == "complete");
  CHECK_FALSE(j["data_objects"].empty());

  std::set<std::string> nodes;
  for (const auto& n : j["nodes"]) nodes.insert(n.get<std::string>());
  for (const auto& d : j["data_objects"]) {
    std::string ref = "data:" + d["kind"].get<std::string>() + ":" +
                      d["owner"].get<std::string>() + ":" + d["name"].get<std::string>();
    CHECK(nodes.count(ref) == 0);
  }
}

TEST_CASE("two builds of the same package serialize identically") {
  std::string a = miniscope::to_json(fixture_complete()).dump(2);
  std::string b = miniscope::to_json(fixture_complete()).dump(2);
  CHECK(a == b);
}

TEST_CASE("a pageless package yields an empty graph") {
  Mdg m = build({{"app.json", R"({"pages": []})"}});
  CHECK(miniscope::mdg_node_ids(m).empty());
  CHECK(miniscope::mdg_edges(m).empty());
}

TEST_CASE("the fixture yields one chase route into its subpackage") {
  Mdg m = fixture_main();
  auto paths = miniscope::subpackage_transition_paths(m);
  REQUIRE(paths.size() == 1);
  const TransitionPath& p = paths[0];
  CHECK(p.target == "checkID/pages/verify/verify");
  CHECK(p.subpackage_root == "checkID");
  REQUIRE(p.steps.size() == 1);
  CHECK(p.steps[0].from_page == "pages/myInfo/myInfo");
  CHECK(p.steps[0].trigger.handler == "navToCheckID");
  CHECK(p.steps.size() == shortest_route_oracle(m, p.target));

  // The promo page has no inbound route, so no path chases it.
  for (const TransitionPath& q : paths) CHECK(q.target != "checkID/pages/promo/promo");
}

TEST_CASE("chase routes keep only the shortest way to each target") {
  std::map<std::string, std::string> files = {
      {"app.json", R"({
        "pages": ["pages/a/a", "pages/b/b"],
        "subpackages": [{"root": "sub", "pages": ["pages/s1/s1", "pages/s2/s2", "pages/s3/s3"]}]
      })"},
      {"pages/a/a.wxml",
       "<navigator url=\"/pages/b/b\">b</navigator>"
       "<navigator url=\"/sub/pages/s1/s1\">s1</navigator>"},
      {"pages/b/b.wxml",
       "<navigator url=\"/sub/pages/s1/s1\">s1</navigator>"
       "<navigator url=\"/sub/pages/s2/s2\">s2</navigator>"}};
  Mdg m = build(files);
  auto paths = miniscope::subpackage_transition_paths(m);

  REQUIRE(paths.size() == 2);  // s3 has no route and is excluded
  CHECK(paths[0].target == "sub/pages/s1/s1");
  CHECK(paths[0].steps.size() == 1);
  CHECK(paths[1].target == "sub/pages/s2/s2");
  CHECK(paths[1].steps.size() == 2);
  CHECK(paths[1].steps[0].target == "pages/b/b");
  CHECK(paths[0].steps.size() == shortest_route_oracle(m, paths[0].target));
  CHECK(paths[1].steps.size() == shortest_route_oracle(m, paths[1].target));
}

TEST_CASE("merge invariants hold across generated packages") {
  std::mt19937 rng(20240701);
  for (int round = 0; round < 5; ++round) {
    testsupport::GeneratedPackage gen = testsupport::generate_package(rng);
    testsupport::TempDir dir;
    testsupport::write_tree(dir.path() / "pkg", gen.main_files);
    miniscope::MiniAppPackage pkg = miniscope::load_package(dir.path() / "pkg");

    Mdg main_only = miniscope::build_mdg(pkg);
    check_merge_invariants(main_only);
    if (gen.sub_root.empty()) continue;

    testsupport::write_tree(dir.path() / "content", gen.sub_files);
    Mdg complete = miniscope::build_mdg(
        miniscope::merge_subpackage(pkg, gen.sub_root, dir.path() / "content"));
    check_merge_invariants(complete);

    auto main_ids = miniscope::mdg_node_ids(main_only);
    auto complete_ids = miniscope::mdg_node_ids(complete);
    CHECK(std::includes(complete_ids.begin(), complete_ids.end(), main_ids.begin(),
                        main_ids.end()));
    auto main_edges = miniscope::mdg_edges(main_only);
    auto complete_edges = miniscope::mdg_edges(complete);
    CHECK(std::includes(complete_edges.begin(), complete_edges.end(), main_edges.begin(),
                        main_edges.end()));
  }
}
