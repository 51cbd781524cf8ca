#pragma once

/// UI transition layer.
///
/// Nodes are declared page paths; edges are concrete routing actions
/// found in markup (<navigator>) or script (the routing APIs), each
/// carrying its mechanism and the trigger that fires it.
///
/// A route whose url is computed at runtime becomes a placeholder edge.
/// resolve_placeholders() replaces it with one edge per string constant
/// that can reach the url variable; a variable with several reaching
/// constants yields several edges.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "miniscope/ccfg.hpp"
#include "miniscope/common.hpp"
#include "miniscope/js_ast.hpp"
#include "miniscope/package.hpp"
#include "miniscope/routing.hpp"
#include "miniscope/udfg.hpp"
#include "miniscope/wxml.hpp"

namespace miniscope {

struct Placeholder {
  std::string var_name;
  std::string page;          // page whose script/markup owns the variable
  bool is_data_field = false;  // markup binding roots live in page data

  auto operator<=>(const Placeholder&) const = default;
};

struct TransitionTrigger {
  enum class Kind { Widget, Lifecycle, Function };
  Kind kind = Kind::Widget;
  std::string page;
  std::string widget_xpath;  // Widget only
  std::string event;         // Widget only
  std::string handler;       // handler/lifecycle/function name

  auto operator<=>(const TransitionTrigger&) const = default;
};

inline const char* to_string(TransitionTrigger::Kind k) {
  switch (k) {
    case TransitionTrigger::Kind::Widget: return "widget";
    case TransitionTrigger::Kind::Lifecycle: return "lifecycle";
    case TransitionTrigger::Kind::Function: return "function";
  }
  return "?";
}

struct TransitionEdge {
  std::string from_page;
  std::string target;  // normalized page path, kBackTarget, or "" while unresolved
  Mechanism mechanism = Mechanism::ApiNavigateTo;
  TransitionTrigger trigger;
  std::optional<Placeholder> placeholder;
  std::string site_file;
  int site_node = -1;          // AST call node for script routes
  std::string site_xpath;      // widget xpath for markup routes

  auto operator<=>(const TransitionEdge&) const = default;
};

struct Utg {
  std::vector<std::string> pages;  // every declared page, loaded or not
  std::vector<TransitionEdge> edges;
  Diagnostics diagnostics;
};

namespace detail {

// Trigger for a script route: the markup binding of the enclosing page
// method if there is one, else its lifecycle slot, else the bare name.
inline TransitionTrigger script_trigger(const AstGraph& g, const std::string& page, int call_node,
                                        const std::map<std::string, int>& methods,
                                        const std::vector<BindCall>& binds) {
  TransitionTrigger t;
  t.kind = TransitionTrigger::Kind::Function;
  t.page = page;
  int fn = g.enclosing_function(call_node);
  std::string method;
  while (fn >= 0 && method.empty()) {
    for (const auto& [name, id] : methods)
      if (id == fn) { method = name; break; }
    fn = g.enclosing_function(fn);
  }
  if (method.empty()) return t;
  t.handler = method;
  if (lifecycle_names().count(method)) {
    t.kind = TransitionTrigger::Kind::Lifecycle;
    return t;
  }
  for (const BindCall& bc : binds)
    if (bc.handler == method) {
      t.kind = TransitionTrigger::Kind::Widget;
      t.widget_xpath = bc.widget_xpath;
      t.event = bc.event;
      return t;
    }
  return t;
}

inline void add_route_edge(Utg& utg, const MiniAppPackage& pkg, TransitionEdge e,
                           const std::set<std::string>& declared) {
  if (stack_effect(e.mechanism) == StackEffect::ClearTab && !e.target.empty() &&
      e.target != kBackTarget) {
    bool is_tab = false;
    for (const std::string& t : pkg.manifest.tab_bar_pages)
      if (t == e.target) { is_tab = true; break; }
    if (!is_tab) {
      utg.diagnostics.push_back({"switch-tab-non-tab",
                                 "switchTab target '" + e.target + "' is not a tab bar page",
                                 e.from_page});
      return;
    }
  }
  if (!e.target.empty() && e.target != kBackTarget && !declared.count(e.target))
    utg.diagnostics.push_back(
        {"route-target-undeclared", "route target '" + e.target + "' is not a declared page",
         e.from_page});
  utg.edges.push_back(std::move(e));
}

}  // namespace detail

inline Utg build_utg(const MiniAppPackage& pkg, const std::map<std::string, AstGraph>& asts,
                     const std::map<std::string, WxmlDoc>& wxml_by_page,
                     const std::map<std::string, std::vector<BindCall>>& bind_calls_by_page) {
  Utg utg;
  std::set<std::string> declared;
  for (const std::string& p : pkg.manifest.page_paths) declared.insert(p);
  for (const auto& sp : pkg.manifest.subpackages)
    for (const std::string& p : sp.page_paths) declared.insert(p);
  utg.pages.assign(declared.begin(), declared.end());

  static const std::vector<BindCall> kNoBinds;
  for (const PageUnit& unit : pkg.pages) {
    const std::string& page = unit.path;
    auto bc_it = bind_calls_by_page.find(page);
    const std::vector<BindCall>& binds = bc_it == bind_calls_by_page.end() ? kNoBinds : bc_it->second;

    // Markup routes.
    auto doc_it = wxml_by_page.find(page);
    if (doc_it != wxml_by_page.end()) {
      std::vector<const WxmlNode*> stack = {&doc_it->second.root};
      while (!stack.empty()) {
        const WxmlNode* n = stack.back();
        stack.pop_back();
        for (const WxmlNode& c : n->children)
          if (!c.is_text()) stack.push_back(&c);
        if (n->tag != "navigator") continue;
        const AttrValue* open_type = n->attr("open-type");
        auto mech = navigator_open_type(open_type ? open_type->raw : "");
        if (!mech) {
          utg.diagnostics.push_back({"unknown-open-type",
                                     "navigator open-type '" + open_type->raw + "' is not recognized",
                                     page + ".wxml " + n->xpath});
          continue;
        }
        TransitionEdge e;
        e.from_page = page;
        e.mechanism = *mech;
        e.trigger = {TransitionTrigger::Kind::Widget, page, n->xpath, "tap", ""};
        e.site_file = page + ".wxml";
        e.site_xpath = n->xpath;
        if (is_back(*mech)) {
          e.target = kBackTarget;
          detail::add_route_edge(utg, pkg, std::move(e), declared);
          continue;
        }
        const AttrValue* url = n->attr("url");
        if (!url) {
          utg.diagnostics.push_back(
              {"navigator-missing-url", "navigator has no url attribute", page + ".wxml " + n->xpath});
          continue;
        }
        if (url->bindings.empty()) {
          auto target = normalize_page_path(url->raw);
          if (!target) {
            utg.diagnostics.push_back(
                {"bad-route-target", "url '" + url->raw + "' is not a page path",
                 page + ".wxml " + n->xpath});
            continue;
          }
          e.target = *target;
          detail::add_route_edge(utg, pkg, std::move(e), declared);
          continue;
        }
        auto roots = detail::binding_roots(url->bindings[0]);
        if (strip_binding_regions(url->raw).find_first_not_of(" \t") != std::string::npos ||
            roots.empty()) {
          // Mixed static text and bindings form no single variable.
          utg.diagnostics.push_back({"dynamic-route-unresolved",
                                     "url expression '" + url->raw + "' cannot be traced",
                                     page + ".wxml " + n->xpath});
          continue;
        }
        e.placeholder = Placeholder{roots[0], page, true};
        detail::add_route_edge(utg, pkg, std::move(e), declared);
      }
    }

    // Script routes.
    auto ast_it = asts.find(page + ".js");
    if (ast_it == asts.end()) continue;
    const AstGraph& ast = ast_it->second;
    auto methods = registration_methods(ast);
    for (const AstNode& n : ast.nodes) {
      if (n.kind != AstKind::CallExpression) continue;
      const AstNode* callee = ast.child(n, AstRole::Callee);
      if (!callee) continue;
      auto mech = parse_mechanism(member_path(ast, callee->id));
      if (!mech) continue;
      TransitionEdge e;
      e.from_page = page;
      e.mechanism = *mech;
      e.trigger = detail::script_trigger(ast, page, n.id, methods, binds);
      e.site_file = page + ".js";
      e.site_node = n.id;
      if (is_back(*mech)) {
        e.target = kBackTarget;
        detail::add_route_edge(utg, pkg, std::move(e), declared);
        continue;
      }
      auto args = ast.children_of(n, AstRole::Argument);
      const AstNode* url_value = nullptr;
      if (!args.empty() && args[0]->kind == AstKind::ObjectLiteral) {
        for (const AstNode* prop : ast.children_of(*args[0], AstRole::Property))
          if (prop->kind == AstKind::Property && prop->str_value == "url")
            url_value = ast.child(*prop, AstRole::Value);
      }
      if (!url_value) {
        utg.diagnostics.push_back({"route-missing-url", "routing call without a url option",
                                   page + ".js#" + std::to_string(n.id)});
        continue;
      }
      if (url_value->kind == AstKind::StringLiteral) {
        auto target = normalize_page_path(url_value->str_value);
        if (!target) {
          utg.diagnostics.push_back({"bad-route-target",
                                     "url '" + url_value->str_value + "' is not a page path",
                                     page + ".js#" + std::to_string(n.id)});
          continue;
        }
        e.target = *target;
      } else if (url_value->kind == AstKind::Identifier) {
        e.placeholder = Placeholder{url_value->str_value, page, false};
      } else if (url_value->kind == AstKind::MemberExpression) {
        std::string path = member_path(ast, url_value->id);
        if (path.starts_with("this.data.") && path.find('.', 10) == std::string::npos) {
          e.placeholder = Placeholder{path.substr(10), page, true};
        } else {
          utg.diagnostics.push_back({"dynamic-route-unresolved",
                                     "url expression cannot be traced to a variable",
                                     page + ".js#" + std::to_string(n.id)});
          continue;
        }
      } else {
        utg.diagnostics.push_back({"dynamic-route-unresolved",
                                   "url expression cannot be traced to a variable",
                                   page + ".js#" + std::to_string(n.id)});
        continue;
      }
      detail::add_route_edge(utg, pkg, std::move(e), declared);
    }
  }
  return utg;
}

// Replaces each placeholder edge with one concrete edge per reaching
// string constant that names a declared page. Placeholders with no
// resolvable constant are kept unresolved so callers can see the gap.
inline Utg resolve_placeholders(const Utg& utg, const Udfg& udfg, const MiniAppPackage& pkg) {
  Utg out;
  out.pages = utg.pages;
  out.diagnostics = utg.diagnostics;
  std::set<std::string> declared(utg.pages.begin(), utg.pages.end());

  for (const TransitionEdge& e : utg.edges) {
    if (!e.placeholder || !e.target.empty()) {
      out.edges.push_back(e);
      continue;
    }
    const Placeholder& ph = *e.placeholder;
    std::vector<std::string> constants;
    if (ph.is_data_field) {
      int start = udfg.find({DataObject::Kind::PageDataField, ph.page, ph.var_name});
      if (start >= 0) {
        // Same backward walk as collect_string_constants, from a field.
        std::vector<std::vector<int>> preds(udfg.nodes.size());
        for (const UdfgEdge& ed : udfg.edges) preds[static_cast<size_t>(ed.to)].push_back(ed.from);
        std::set<int> seen = {start};
        std::vector<int> frontier = {start};
        std::set<std::string> found;
        while (!frontier.empty()) {
          int cur = frontier.back();
          frontier.pop_back();
          const DataObject& d = udfg.nodes[static_cast<size_t>(cur)];
          if (d.kind == DataObject::Kind::Literal && d.owner == "str") found.insert(d.name);
          for (int p : preds[static_cast<size_t>(cur)])
            if (seen.insert(p).second) frontier.push_back(p);
        }
        constants.assign(found.begin(), found.end());
      }
    } else {
      constants = collect_string_constants(udfg, ph.page + ".js", ph.var_name);
    }

    bool resolved_any = false;
    for (const std::string& c : constants) {
      auto target = normalize_page_path(c);
      if (!target || !declared.count(*target)) continue;
      TransitionEdge concrete = e;
      concrete.target = *target;
      detail::add_route_edge(out, pkg, std::move(concrete), declared);
      resolved_any = true;
    }
    if (!resolved_any) {
      out.diagnostics.push_back({"unresolved-placeholder",
                                 "no page constant reaches route variable '" + ph.var_name + "'",
                                 ph.page});
      out.edges.push_back(e);
    }
  }
  return out;
}

// Pages reachable from the roots over resolved forward edges. Back
// transitions revisit pages already on the stack and discover nothing.
inline std::set<std::string> utg_reachable(const Utg& utg, const std::vector<std::string>& roots) {
  std::map<std::string, std::vector<std::string>> adj;
  for (const TransitionEdge& e : utg.edges)
    if (!e.target.empty() && e.target != kBackTarget) adj[e.from_page].push_back(e.target);
  std::set<std::string> seen;
  std::vector<std::string> frontier;
  for (const std::string& r : roots)
    if (seen.insert(r).second) frontier.push_back(r);
  while (!frontier.empty()) {
    std::string cur = frontier.back();
    frontier.pop_back();
    for (const std::string& next : adj[cur])
      if (seen.insert(next).second) frontier.push_back(next);
  }
  return seen;
}

}  // namespace miniscope
