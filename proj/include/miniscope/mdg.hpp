#pragma once

/// The merged dependency graph: one structure holding every layer built
/// from a package, plus the flattened node/edge view used for
/// serialization and cross-phase comparison.
///
/// Node identity is textual and stable across phases:
///   <file>#<n>      AST node n of a script file
///   page:<path>     a declared page; stands in for the root of the
///                   page's script AST once that script is loaded
///   ph:<page>:<var> an unresolved route placeholder
///
/// Because ids never depend on global offsets, the node set of the
/// main-only phase is a subset of the complete phase's by construction;
/// tests assert it anyway.
///
/// Layer tags partition the edge list: ast, utg, ccfg, udfg. Data
/// objects referenced by udfg edges are serialized alongside the node
/// list under their own key; they are layer-internal, not part of the
/// merged node set.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "miniscope/ccfg.hpp"
#include "miniscope/common.hpp"
#include "miniscope/js_ast.hpp"
#include "miniscope/package.hpp"
#include "miniscope/udfg.hpp"
#include "miniscope/utg.hpp"
#include "miniscope/wxml.hpp"

namespace miniscope {

struct Mdg {
  std::string phase;  // "main-only" or "complete"
  MiniAppPackage pkg;

  std::map<std::string, AstGraph> asts;
  std::map<std::string, WxmlDoc> wxml;
  std::map<std::string, std::vector<BindCall>> bind_calls;
  std::map<std::string, std::vector<DataBindingRef>> data_bindings;
  Utg utg;
  Ccfg ccfg;
  Udfg udfg;
  Diagnostics diagnostics;

  bool is_page_script(const std::string& file) const {
    if (!file.ends_with(".js")) return false;
    return pkg.find_page(file.substr(0, file.size() - 3)) != nullptr;
  }

  std::string ast_node_ref(const std::string& file, int node) const {
    if (node == 0 && is_page_script(file)) return "page:" + file.substr(0, file.size() - 3);
    return file + "#" + std::to_string(node);
  }

  std::string page_node_ref(const std::string& page) const { return "page:" + page; }
};

namespace detail {

// Reads a module's source: merged subpackage modules arrive as page
// units, main-package modules straight from disk.
inline std::optional<std::string> module_source(const MiniAppPackage& pkg,
                                                const std::string& path) {
  if (path.ends_with(".js")) {
    if (const PageUnit* p = pkg.find_page(path.substr(0, path.size() - 3)); p && !p->js_source.empty())
      return p->js_source;
  }
  return read_file(pkg.root / path);
}

}  // namespace detail

// Parses every script and markup file and assembles all four layers.
// Imports are chased transitively; files that fail to parse are skipped
// with a diagnostic so one bad script cannot sink the whole package.
inline Mdg build_mdg(const MiniAppPackage& pkg) {
  Mdg m;
  m.pkg = pkg;
  m.phase = pkg.complete ? "complete" : "main-only";
  m.diagnostics = pkg.diagnostics;

  auto parse_script = [&](const std::string& file, const std::string& source) {
    if (m.asts.count(file)) return;
    try {
      m.asts.emplace(file, parse_js(source, file));
    } catch (const Error& e) {
      m.diagnostics.push_back({"parse-error", e.what(), file});
    }
  };

  if (auto app = read_file(pkg.root / "app.js")) parse_script("app.js", *app);
  for (const PageUnit& p : pkg.pages) {
    if (!p.js_source.empty()) parse_script(p.path + ".js", p.js_source);
    if (!p.wxml_source.empty()) {
      WxmlDoc doc = parse_wxml(p.wxml_source, p.path);
      for (const Diagnostic& d : doc.diagnostics) m.diagnostics.push_back(d);
      m.bind_calls[p.path] = extract_bind_calls(doc, &m.diagnostics);
      m.data_bindings[p.path] = extract_data_bindings(doc);
      m.wxml.emplace(p.path, std::move(doc));
    }
  }

  // Chase imports until closure.
  std::set<std::string> scanned;
  bool grew = true;
  while (grew) {
    grew = false;
    std::vector<std::string> files;
    for (const auto& [file, ast] : m.asts) files.push_back(file);
    for (const std::string& file : files) {
      if (!scanned.insert(file).second) continue;
      for (const auto& [spec, path] : get_imported_modules(m.asts.at(file))) {
        if (m.asts.count(path)) continue;
        auto src = detail::module_source(pkg, path);
        if (!src) {
          m.diagnostics.push_back({"module-not-found", "import '" + path + "' has no source file", file});
          continue;
        }
        parse_script(path, *src);
        grew = true;
      }
    }
  }

  for (const auto& d : m.asts)
    for (const Diagnostic& diag : d.second.diagnostics) m.diagnostics.push_back(diag);

  m.ccfg = build_ccfg(pkg, m.asts, m.bind_calls);
  m.udfg = build_udfg(pkg, m.asts, m.bind_calls, m.data_bindings);
  Utg raw = build_utg(pkg, m.asts, m.wxml, m.bind_calls);
  m.utg = resolve_placeholders(raw, m.udfg, pkg);

  for (const Diagnostic& d : m.ccfg.diagnostics) m.diagnostics.push_back(d);
  for (const Diagnostic& d : m.udfg.diagnostics) m.diagnostics.push_back(d);
  for (const Diagnostic& d : m.utg.diagnostics) m.diagnostics.push_back(d);
  return m;
}

// ---- flattened view ----

struct MdgEdge {
  std::string from;
  std::string to;
  std::string layer;
  std::string kind;

  auto operator<=>(const MdgEdge&) const = default;
};

// The merged node set: every AST node of every loaded script plus one
// node per declared page, plus unresolved placeholders.
inline std::vector<std::string> mdg_node_ids(const Mdg& m) {
  std::set<std::string> ids;
  for (const auto& [file, ast] : m.asts)
    for (const AstNode& n : ast.nodes) ids.insert(m.ast_node_ref(file, n.id));
  for (const std::string& page : m.utg.pages) ids.insert(m.page_node_ref(page));
  for (const TransitionEdge& e : m.utg.edges)
    if (e.placeholder && e.target.empty())
      ids.insert("ph:" + e.placeholder->page + ":" + e.placeholder->var_name);
  return {ids.begin(), ids.end()};
}

inline std::vector<MdgEdge> mdg_edges(const Mdg& m) {
  std::set<MdgEdge> edges;
  for (const auto& [file, ast] : m.asts)
    for (const AstEdge& e : ast.edges)
      edges.insert({m.ast_node_ref(file, e.parent), m.ast_node_ref(file, e.child), "ast",
                    to_string(e.role)});

  for (const TransitionEdge& e : m.utg.edges) {
    std::string to;
    if (e.target == kBackTarget) to = kBackTarget;
    else if (!e.target.empty()) to = m.page_node_ref(e.target);
    else if (e.placeholder) to = "ph:" + e.placeholder->page + ":" + e.placeholder->var_name;
    else continue;
    edges.insert({m.page_node_ref(e.from_page), to, "utg", to_string(e.mechanism)});
  }

  for (const CcfgEdge& e : m.ccfg.edges) {
    const FunctionRef& target = m.ccfg.functions[static_cast<size_t>(e.to_fn)];
    std::string to = m.ast_node_ref(target.file, target.ast_node_id);
    std::string from;
    if (e.kind == CcfgEdge::Kind::Lifecycle || e.kind == CcfgEdge::Kind::GuiEvent) {
      const EntryEvent& entry = m.ccfg.entries[static_cast<size_t>(e.entry)];
      from = entry.page.empty() ? "app.js#0" : m.page_node_ref(entry.page);
    } else {
      const FunctionRef& source = m.ccfg.functions[static_cast<size_t>(e.from_fn)];
      from = m.ast_node_ref(source.file, source.ast_node_id);
    }
    edges.insert({std::move(from), std::move(to), "ccfg", to_string(e.kind)});
  }

  auto data_ref = [](const DataObject& d) {
    return "data:" + std::string(to_string(d.kind)) + ":" + d.owner + ":" + d.name;
  };
  for (const UdfgEdge& e : m.udfg.edges)
    edges.insert({data_ref(m.udfg.nodes[static_cast<size_t>(e.from)]),
                  data_ref(m.udfg.nodes[static_cast<size_t>(e.to)]), "udfg", to_string(e.label)});

  return {edges.begin(), edges.end()};
}

inline nlohmann::json to_json(const Diagnostic& d) {
  return {{"code", d.code}, {"message", d.message}, {"where", d.where}};
}

inline nlohmann::json to_json(const Mdg& m) {
  nlohmann::json j;
  j["phase"] = m.phase;
  j["pages"] = m.utg.pages;
  j["nodes"] = mdg_node_ids(m);
  nlohmann::json edges = nlohmann::json::array();
  for (const MdgEdge& e : mdg_edges(m))
    edges.push_back({{"from", e.from}, {"to", e.to}, {"layer", e.layer}, {"kind", e.kind}});
  j["edges"] = std::move(edges);
  nlohmann::json data = nlohmann::json::array();
  for (const DataObject& d : m.udfg.nodes)
    data.push_back({{"kind", to_string(d.kind)}, {"owner", d.owner}, {"name", d.name}});
  std::sort(data.begin(), data.end(),
            [](const nlohmann::json& a, const nlohmann::json& b) { return a.dump() < b.dump(); });
  j["data_objects"] = std::move(data);
  nlohmann::json diags = nlohmann::json::array();
  for (const Diagnostic& d : m.diagnostics) diags.push_back(to_json(d));
  j["diagnostics"] = std::move(diags);
  return j;
}

// ---- routes into subpackages ----

// One shortest route from the launch page to each routable page of a
// not-yet-loaded subpackage. Deterministic: adjacency and targets are
// visited in sorted order, so equal-length routes resolve the same way
// on every run.
struct TransitionPath {
  std::string target;
  std::string subpackage_root;
  std::vector<TransitionEdge> steps;
};

inline std::vector<TransitionPath> subpackage_transition_paths(const Mdg& m) {
  const std::string launch = m.pkg.launch_page();
  if (launch.empty()) return {};

  std::vector<TransitionEdge> sorted = m.utg.edges;
  std::sort(sorted.begin(), sorted.end());
  std::map<std::string, std::vector<const TransitionEdge*>> adj;
  for (const TransitionEdge& e : sorted)
    if (!e.target.empty() && e.target != kBackTarget) adj[e.from_page].push_back(&e);

  std::map<std::string, const TransitionEdge*> parent_edge;
  std::vector<std::string> frontier = {launch};
  std::set<std::string> seen = {launch};
  while (!frontier.empty()) {
    std::vector<std::string> next;
    for (const std::string& cur : frontier)
      for (const TransitionEdge* e : adj[cur])
        if (seen.insert(e->target).second) {
          parent_edge[e->target] = e;
          next.push_back(e->target);
        }
    frontier = std::move(next);
  }

  std::vector<TransitionPath> out;
  for (const SubpackageSpec& sp : m.pkg.subpackages) {
    if (sp.loaded) continue;
    for (const std::string& page : sp.page_paths) {
      if (!seen.count(page)) continue;
      TransitionPath path;
      path.target = page;
      path.subpackage_root = sp.root_prefix;
      for (std::string cur = page; cur != launch;) {
        const TransitionEdge* e = parent_edge.at(cur);
        path.steps.push_back(*e);
        cur = e->from_page;
      }
      std::reverse(path.steps.begin(), path.steps.end());
      out.push_back(std::move(path));
    }
  }
  std::sort(out.begin(), out.end(), [](const TransitionPath& a, const TransitionPath& b) {
    if (a.steps.size() != b.steps.size()) return a.steps.size() < b.steps.size();
    return a.target < b.target;
  });
  return out;
}

}  // namespace miniscope
