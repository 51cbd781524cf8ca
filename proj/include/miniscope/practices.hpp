#pragma once

/// Privacy practice extraction: every call site of a cataloged API is
/// classified with exactly one verdict.
///
///   reachable        some user-triggerable entry leads to the call;
///                    the shortest such trigger path is attached
///   dead-code        orphaned-page: the owning page cannot be routed
///                    to from the launch or tab pages
///                    unused-function: the page is live (or the call
///                    sits in a shared module) but no live entry event
///                    reaches the enclosing function
///
/// Reachability roots: the launch page and every tab bar page. App
/// lifecycle methods are always live. Trigger paths are found by BFS
/// over the callback layer, multi-sourced from all live entries in
/// sorted order, so ties break lexicographically and the result is
/// stable across runs.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "miniscope/api_catalog.hpp"
#include "miniscope/mdg.hpp"

namespace miniscope {

struct PracticeSite {
  std::string api;
  std::string category;
  std::string file;
  int call_node = -1;
  std::string page;  // owning page; empty for shared modules and app.js

  auto operator<=>(const PracticeSite&) const = default;
};

struct TriggerStep {
  std::string kind;   // entry | direct-call | dynamic-definition | call-site
  std::string label;  // handler/function name, or the API for the call site
  std::string node;   // merged-graph node reference

  auto operator<=>(const TriggerStep&) const = default;
};

struct PrivacyPractice {
  PracticeSite site;
  std::string verdict;    // "reachable" | "dead-code"
  std::string dead_kind;  // "orphaned-page" | "unused-function" when dead
  std::string entry_page;
  std::string entry_kind;     // "lifecycle" | "gui-event" when reachable
  std::string entry_handler;  // handler or lifecycle name
  std::vector<TriggerStep> trigger_path;

  auto operator<=>(const PrivacyPractice&) const = default;
};

namespace detail {

struct EntrySeed {
  std::string page;     // "" for app
  std::string kind;     // "lifecycle" | "gui-event"
  std::string handler;
  int fn = -1;          // ccfg function index the entry fires

  auto operator<=>(const EntrySeed&) const = default;
};

}  // namespace detail

// All cataloged call sites, in stable sorted order.
inline std::vector<PracticeSite> find_practice_sites(const Mdg& m, const ApiCatalog& catalog) {
  std::vector<PracticeSite> out;
  for (const auto& [file, ast] : m.asts) {
    std::string page;
    if (m.is_page_script(file)) page = file.substr(0, file.size() - 3);
    for (const AstNode& n : ast.nodes) {
      if (n.kind != AstKind::CallExpression) continue;
      const AstNode* callee = ast.child(n, AstRole::Callee);
      if (!callee) continue;
      std::string path = member_path(ast, callee->id);
      auto cat = catalog.category(path);
      if (!cat) continue;
      out.push_back({path, *cat, file, n.id, page});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<PrivacyPractice> reachable_practices(const Mdg& m, const ApiCatalog& catalog) {
  std::vector<std::string> roots;
  if (!m.pkg.launch_page().empty()) roots.push_back(m.pkg.launch_page());
  for (const std::string& t : m.pkg.manifest.tab_bar_pages) roots.push_back(t);
  std::set<std::string> live_pages = utg_reachable(m.utg, roots);

  // Seed BFS with entries of live pages plus app lifecycle methods.
  std::vector<detail::EntrySeed> seeds;
  for (size_t i = 0; i < m.ccfg.entries.size(); ++i) {
    const EntryEvent& e = m.ccfg.entries[i];
    if (!e.page.empty() && !live_pages.count(e.page)) continue;
    int target = -1;
    for (const CcfgEdge& edge : m.ccfg.edges)
      if (edge.entry == static_cast<int>(i) &&
          (edge.kind == CcfgEdge::Kind::Lifecycle || edge.kind == CcfgEdge::Kind::GuiEvent)) {
        target = edge.to_fn;
        break;
      }
    if (target < 0) continue;
    detail::EntrySeed s;
    s.page = e.page;
    s.kind = e.kind == EntryEvent::Kind::Lifecycle ? "lifecycle" : "gui-event";
    s.handler = e.handler;
    s.fn = target;
    seeds.push_back(std::move(s));
  }
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

  // Multi-source BFS over call/definition edges, tracking the seed and
  // parent edge that first reach each function.
  size_t fn_count = m.ccfg.functions.size();
  std::vector<int> seed_of(fn_count, -1);
  std::vector<int> parent_fn(fn_count, -1);
  std::vector<const CcfgEdge*> parent_edge(fn_count, nullptr);

  std::vector<const CcfgEdge*> call_edges;
  for (const CcfgEdge& e : m.ccfg.edges)
    if (e.kind == CcfgEdge::Kind::DirectCall || e.kind == CcfgEdge::Kind::DynamicDefinition)
      call_edges.push_back(&e);
  std::sort(call_edges.begin(), call_edges.end(),
            [](const CcfgEdge* a, const CcfgEdge* b) { return *a < *b; });
  std::map<int, std::vector<const CcfgEdge*>> adj;
  for (const CcfgEdge* e : call_edges) adj[e->from_fn].push_back(e);

  std::vector<int> frontier;
  for (size_t i = 0; i < seeds.size(); ++i) {
    int fn = seeds[i].fn;
    if (seed_of[static_cast<size_t>(fn)] >= 0) continue;
    seed_of[static_cast<size_t>(fn)] = static_cast<int>(i);
    frontier.push_back(fn);
  }
  while (!frontier.empty()) {
    std::vector<int> next;
    for (int cur : frontier)
      for (const CcfgEdge* e : adj[cur]) {
        size_t to = static_cast<size_t>(e->to_fn);
        if (seed_of[to] >= 0) continue;
        seed_of[to] = seed_of[static_cast<size_t>(cur)];
        parent_fn[to] = cur;
        parent_edge[to] = e;
        next.push_back(e->to_fn);
      }
    frontier = std::move(next);
  }

  std::vector<PrivacyPractice> out;
  for (const PracticeSite& site : find_practice_sites(m, catalog)) {
    PrivacyPractice p;
    p.site = site;

    if (!site.page.empty() && !live_pages.count(site.page)) {
      p.verdict = "dead-code";
      p.dead_kind = "orphaned-page";
      out.push_back(std::move(p));
      continue;
    }

    const AstGraph& ast = m.asts.at(site.file);
    int fn_idx = detail::enclosing_ccfg_function(m.ccfg, ast, site.call_node);
    if (fn_idx < 0 || seed_of[static_cast<size_t>(fn_idx)] < 0) {
      p.verdict = "dead-code";
      p.dead_kind = "unused-function";
      out.push_back(std::move(p));
      continue;
    }

    const detail::EntrySeed& seed = seeds[static_cast<size_t>(seed_of[static_cast<size_t>(fn_idx)])];
    p.verdict = "reachable";
    p.entry_page = seed.page;
    p.entry_kind = seed.kind;
    p.entry_handler = seed.handler;

    std::vector<TriggerStep> rev;
    rev.push_back({"call-site", site.api, m.ast_node_ref(site.file, site.call_node)});
    for (int cur = fn_idx; parent_edge[static_cast<size_t>(cur)] != nullptr;
         cur = parent_fn[static_cast<size_t>(cur)]) {
      const CcfgEdge* e = parent_edge[static_cast<size_t>(cur)];
      const FunctionRef& fn = m.ccfg.functions[static_cast<size_t>(cur)];
      rev.push_back({to_string(e->kind), fn.name, m.ast_node_ref(fn.file, fn.ast_node_id)});
    }
    const FunctionRef& entry_fn = m.ccfg.functions[static_cast<size_t>(seed.fn)];
    rev.push_back({"entry", seed.handler, m.ast_node_ref(entry_fn.file, entry_fn.ast_node_id)});
    p.trigger_path.assign(rev.rbegin(), rev.rend());
    out.push_back(std::move(p));
  }
  return out;
}

inline nlohmann::json to_json(const PrivacyPractice& p) {
  nlohmann::json j;
  j["api"] = p.site.api;
  j["category"] = p.site.category;
  j["group"] = category_group(p.site.category);
  j["file"] = p.site.file;
  j["node"] = p.site.call_node;
  j["page"] = p.site.page;
  j["verdict"] = p.verdict;
  if (p.verdict == "dead-code") {
    j["dead_kind"] = p.dead_kind;
  } else {
    j["entry"] = {{"page", p.entry_page}, {"kind", p.entry_kind}, {"handler", p.entry_handler}};
    nlohmann::json steps = nlohmann::json::array();
    for (const TriggerStep& s : p.trigger_path)
      steps.push_back({{"kind", s.kind}, {"label", s.label}, {"node", s.node}});
    j["trigger_path"] = std::move(steps);
  }
  return j;
}

inline nlohmann::json practices_to_json(const std::vector<PrivacyPractice>& practices,
                                        const std::string& phase) {
  nlohmann::json j;
  j["phase"] = phase;
  nlohmann::json arr = nlohmann::json::array();
  for (const PrivacyPractice& p : practices) arr.push_back(to_json(p));
  j["practices"] = std::move(arr);
  return j;
}

}  // namespace miniscope
