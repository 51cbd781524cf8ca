#pragma once

/// UI data-flow layer.
///
/// Nodes are data objects, merged flow-insensitively by (kind, owner,
/// name); edges describe how values move between them. Variable scoping
/// collapses to one node per (file, name): precision is traded for a
/// graph that stays stable across runs and phases.
///
/// Kinds:
///   js-var           script variable or parameter; owner = file
///   page-data-field  field of a page's data object; owner = page
///   wxml-binding     {{...}} expression in markup; owner = page
///   event-payload    event object delivered to a bound handler
///   api-result       value produced by a platform API call
///   literal          constant; owner = "str" or "num"
///
/// The layer answers one question precisely: which string constants can
/// reach a given variable (collect_string_constants), used to resolve
/// route targets that are built dynamically.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "miniscope/ccfg.hpp"
#include "miniscope/common.hpp"
#include "miniscope/js_ast.hpp"
#include "miniscope/package.hpp"
#include "miniscope/wxml.hpp"

namespace miniscope {

struct DataObject {
  enum class Kind { JsVar, PageDataField, WxmlBinding, EventPayload, ApiResult, Literal };
  Kind kind = Kind::JsVar;
  std::string owner;
  std::string name;

  auto operator<=>(const DataObject&) const = default;
};

inline const char* to_string(DataObject::Kind k) {
  switch (k) {
    case DataObject::Kind::JsVar: return "js-var";
    case DataObject::Kind::PageDataField: return "page-data-field";
    case DataObject::Kind::WxmlBinding: return "wxml-binding";
    case DataObject::Kind::EventPayload: return "event-payload";
    case DataObject::Kind::ApiResult: return "api-result";
    case DataObject::Kind::Literal: return "literal";
  }
  return "?";
}

struct UdfgEdge {
  enum class Label {
    Assignment,
    SetData,
    DataBinding,
    EventPropagation,
    ArgumentPass,
    ContextBinding,
    Return,
  };
  Label label = Label::Assignment;
  int from = -1;
  int to = -1;
  std::string site_file;
  int site_node = -1;

  auto operator<=>(const UdfgEdge&) const = default;
};

inline const char* to_string(UdfgEdge::Label l) {
  switch (l) {
    case UdfgEdge::Label::Assignment: return "assignment";
    case UdfgEdge::Label::SetData: return "setData";
    case UdfgEdge::Label::DataBinding: return "data-binding";
    case UdfgEdge::Label::EventPropagation: return "event-propagation";
    case UdfgEdge::Label::ArgumentPass: return "argument-pass";
    case UdfgEdge::Label::ContextBinding: return "context-binding";
    case UdfgEdge::Label::Return: return "return";
  }
  return "?";
}

struct Udfg {
  std::vector<DataObject> nodes;
  std::vector<UdfgEdge> edges;
  Diagnostics diagnostics;

  std::map<DataObject, int> index;
  std::set<UdfgEdge> edge_set;

  int intern(DataObject d) {
    auto [it, inserted] = index.emplace(d, static_cast<int>(nodes.size()));
    if (inserted) nodes.push_back(std::move(d));
    return it->second;
  }

  int find(const DataObject& d) const {
    auto it = index.find(d);
    return it == index.end() ? -1 : it->second;
  }

  void add_edge(UdfgEdge e) {
    if (e.from < 0 || e.to < 0 || e.from == e.to) return;
    if (edge_set.insert(e).second) edges.push_back(std::move(e));
  }
};

namespace detail {

// Root identifiers referenced by a binding expression. A crude scan is
// enough: identifiers not preceded by '.' are data-field roots.
inline std::vector<std::string> binding_roots(const std::string& expr) {
  std::vector<std::string> out;
  size_t i = 0;
  bool after_dot = false;
  while (i < expr.size()) {
    char c = expr[i];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
      size_t j = i;
      while (j < expr.size() && (std::isalnum(static_cast<unsigned char>(expr[j])) ||
                                 expr[j] == '_' || expr[j] == '$'))
        ++j;
      std::string word = expr.substr(i, j - i);
      if (!after_dot && word != "true" && word != "false" && word != "null" &&
          word != "undefined" &&
          std::find(out.begin(), out.end(), word) == out.end())
        out.push_back(word);
      i = j;
      after_dot = false;
      continue;
    }
    if (c == '\'' || c == '"') {  // skip string literals inside expressions
      char q = c;
      ++i;
      while (i < expr.size() && expr[i] != q) i += expr[i] == '\\' ? 2 : 1;
      if (i < expr.size()) ++i;
      after_dot = false;
      continue;
    }
    after_dot = c == '.';
    ++i;
  }
  return out;
}

// Source data objects for the value expression at `node`. Recurses
// through conditionals; concatenations are opaque (no constant can be
// formed from a fragment, so nothing useful flows through them).
inline void value_sources(Udfg& u, const AstGraph& g, const std::string& page, int node,
                          std::vector<int>& out) {
  const AstNode& n = g.node(node);
  switch (n.kind) {
    case AstKind::StringLiteral:
      out.push_back(u.intern({DataObject::Kind::Literal, "str", n.str_value}));
      return;
    case AstKind::NumberLiteral:
      out.push_back(u.intern({DataObject::Kind::Literal, "num", n.str_value}));
      return;
    case AstKind::Identifier:
      out.push_back(u.intern({DataObject::Kind::JsVar, g.file, n.str_value}));
      return;
    case AstKind::MemberExpression: {
      std::string path = member_path(g, node);
      if (path.starts_with("this.data.") && !page.empty()) {
        std::string field = path.substr(10);
        auto dot = field.find('.');
        if (dot != std::string::npos) field.resize(dot);
        out.push_back(u.intern({DataObject::Kind::PageDataField, page, field}));
        return;
      }
      auto dot = path.find('.');
      if (dot != std::string::npos && dot > 0 && path.substr(0, 4) != "wx." &&
          path.substr(0, 5) != "this.")
        out.push_back(u.intern({DataObject::Kind::JsVar, g.file, path.substr(0, dot)}));
      return;
    }
    case AstKind::CallExpression: {
      const AstNode* callee = g.child(n, AstRole::Callee);
      if (!callee) return;
      std::string path = member_path(g, callee->id);
      if (path.starts_with("wx."))
        out.push_back(u.intern({DataObject::Kind::ApiResult, g.file, path}));
      return;
    }
    case AstKind::Other:
      if (n.str_value == "?:") {
        // Operands are condition, then-value, else-value; the condition
        // contributes no value.
        auto ops = g.children_of(n, AstRole::Operand);
        for (size_t i = 1; i < ops.size(); ++i) value_sources(u, g, page, ops[i]->id, out);
      }
      return;
    default:
      return;
  }
}

}  // namespace detail

// Builds the layer across all loaded scripts. Markup bindings come in as
// extracted references per page.
inline Udfg build_udfg(const MiniAppPackage& pkg, const std::map<std::string, AstGraph>& asts,
                       const std::map<std::string, std::vector<BindCall>>& bind_calls_by_page,
                       const std::map<std::string, std::vector<DataBindingRef>>& bindings_by_page) {
  Udfg u;

  std::map<std::string, std::string> page_of_file;
  for (const PageUnit& p : pkg.pages) page_of_file[p.path + ".js"] = p.path;
  auto page_of = [&](const std::string& file) {
    auto it = page_of_file.find(file);
    return it == page_of_file.end() ? std::string() : it->second;
  };

  // Context bindings let module-side setData reach page data fields.
  // binding list per (module file, param name) -> pages bound to it.
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> ctx_pages;
  std::vector<ExCall> all_excalls;
  for (const PageUnit& p : pkg.pages) {
    std::string file = p.path + ".js";
    auto ast_it = asts.find(file);
    if (ast_it == asts.end()) continue;
    ImportMap imports = get_imported_modules(ast_it->second);
    for (const ContextBinding& b :
         resolve_context_bindings(ast_it->second, imports, asts, &u.diagnostics)) {
      ctx_pages[{b.module_file, b.param_name}].push_back(p.path);
      int from = u.intern({DataObject::Kind::JsVar, b.page_file, "this"});
      int to = u.intern({DataObject::Kind::JsVar, b.module_file, b.param_name});
      u.add_edge({UdfgEdge::Label::ContextBinding, from, to, b.page_file, b.call_node});
    }
    auto bc_it = bind_calls_by_page.find(p.path);
    if (bc_it != bind_calls_by_page.end())
      for (ExCall ex :
           get_crossfile_callbacks(ast_it->second, imports, bc_it->second, asts, nullptr))
        all_excalls.push_back(std::move(ex));
  }

  // Assignments, declarations, setData calls, API results, argument
  // passing and returns, one file at a time.
  for (const auto& [file, ast] : asts) {
    std::string page = page_of(file);
    ImportMap imports = get_imported_modules(ast);
    auto names = named_functions(ast);
    auto methods = registration_methods(ast);

    auto find_callee_fn = [&](const AstNode& call)
        -> std::optional<std::pair<const AstGraph*, const NamedFunction*>> {
      const AstNode* callee = ast.child(call, AstRole::Callee);
      if (!callee) return std::nullopt;
      auto local = [&](const std::string& nm)
          -> std::optional<std::pair<const AstGraph*, const NamedFunction*>> {
        for (const NamedFunction& f : names)
          if (f.name == nm) return std::make_pair(&ast, &f);
        return std::nullopt;
      };
      if (callee->kind == AstKind::Identifier) return local(callee->str_value);
      std::string path = member_path(ast, callee->id);
      if (path.starts_with("this.") && path.find('.', 5) == std::string::npos)
        return local(path.substr(5));
      if (auto resolved = detail::imported_callee(ast, call, imports)) {
        auto mod_it = asts.find(resolved->first);
        if (mod_it == asts.end()) return std::nullopt;
        // NamedFunction points into the module graph; look it up there.
        static thread_local std::map<std::string, std::vector<NamedFunction>> cache;
        auto c = cache.find(resolved->first);
        if (c == cache.end())
          c = cache.emplace(resolved->first, named_functions(mod_it->second)).first;
        for (const NamedFunction& f : c->second)
          if (f.name == resolved->second) return std::make_pair(&mod_it->second, &f);
      }
      return std::nullopt;
    };

    auto flow_into = [&](int target, int value_node, UdfgEdge::Label label) {
      std::vector<int> sources;
      detail::value_sources(u, ast, page, value_node, sources);
      for (int s : sources) u.add_edge({label, s, target, file, value_node});
    };

    // The registration object's `data` literal seeds the page's fields.
    if (!page.empty()) {
      if (auto reg = find_registration(ast)) {
        for (const AstNode* prop : ast.children_of(ast.node(reg->object_node), AstRole::Property)) {
          if (prop->kind != AstKind::Property || prop->str_value != "data") continue;
          const AstNode* init = ast.child(*prop, AstRole::Value);
          if (!init || init->kind != AstKind::ObjectLiteral) continue;
          for (const AstNode* field : ast.children_of(*init, AstRole::Property)) {
            if (field->kind != AstKind::Property) continue;
            const AstNode* value = ast.child(*field, AstRole::Value);
            if (!value) continue;
            int target = u.intern({DataObject::Kind::PageDataField, page, field->str_value});
            flow_into(target, value->id, UdfgEdge::Label::Assignment);
          }
        }
      }
    }

    for (const AstNode& n : ast.nodes) {
      if (n.kind == AstKind::VariableDeclarator) {
        const AstNode* id = ast.child(n, AstRole::Id);
        const AstNode* init = ast.child(n, AstRole::Init);
        if (!id || !init || id->kind != AstKind::Identifier) continue;
        int target = u.intern({DataObject::Kind::JsVar, file, id->str_value});
        flow_into(target, init->id, UdfgEdge::Label::Assignment);
        // Values returned by a resolvable callee flow to the declared var.
        if (init->kind == AstKind::CallExpression) {
          if (auto callee = find_callee_fn(*init)) {
            const AstGraph& cg = *callee->first;
            const AstNode& fn = cg.node(callee->second->fn_node);
            for (int id2 = fn.id; id2 < fn.subtree_end; ++id2) {
              const AstNode& r = cg.node(id2);
              if (r.kind != AstKind::Return) continue;
              if (const AstNode* val = cg.child(r, AstRole::ReturnValue)) {
                std::vector<int> sources;
                detail::value_sources(u, cg, page_of(cg.file), val->id, sources);
                for (int s : sources)
                  u.add_edge({UdfgEdge::Label::Return, s, target, cg.file, val->id});
              }
            }
          }
        }
        continue;
      }
      if (n.kind == AstKind::Assignment) {
        const AstNode* left = ast.child(n, AstRole::Left);
        const AstNode* right = ast.child(n, AstRole::Right);
        if (!left || !right) continue;
        int target = -1;
        if (left->kind == AstKind::Identifier) {
          target = u.intern({DataObject::Kind::JsVar, file, left->str_value});
        } else if (left->kind == AstKind::MemberExpression) {
          std::string path = member_path(ast, left->id);
          if (path.starts_with("this.data.") && !page.empty()) {
            std::string field = path.substr(10);
            if (field.find('.') == std::string::npos)
              target = u.intern({DataObject::Kind::PageDataField, page, field});
          }
        }
        if (target >= 0) flow_into(target, right->id, UdfgEdge::Label::Assignment);
        continue;
      }
      if (n.kind != AstKind::CallExpression) continue;
      const AstNode* callee = ast.child(n, AstRole::Callee);
      if (!callee) continue;
      std::string callee_path = member_path(ast, callee->id);
      auto args = ast.children_of(n, AstRole::Argument);

      // setData: object argument keys become page data fields. A page
      // context received across files fans out to every bound page.
      std::vector<std::string> setdata_pages;
      if (callee_path == "this.setData" && !page.empty()) {
        setdata_pages.push_back(page);
      } else if (callee_path.ends_with(".setData")) {
        std::string recv = callee_path.substr(0, callee_path.size() - 8);
        auto it = ctx_pages.find({file, recv});
        if (it != ctx_pages.end()) setdata_pages = it->second;
      }
      if (!setdata_pages.empty() && !args.empty() && args[0]->kind == AstKind::ObjectLiteral) {
        for (const AstNode* prop : ast.children_of(*args[0], AstRole::Property)) {
          if (prop->kind != AstKind::Property) continue;
          const AstNode* value = ast.child(*prop, AstRole::Value);
          if (!value) continue;
          for (const std::string& pg : setdata_pages) {
            int target = u.intern({DataObject::Kind::PageDataField, pg, prop->str_value});
            std::vector<int> sources;
            detail::value_sources(u, ast, page, value->id, sources);
            for (int s : sources) u.add_edge({UdfgEdge::Label::SetData, s, target, file, n.id});
          }
        }
      }

      // Platform API callbacks: the result parameter is fed by the call.
      if (callee_path.starts_with("wx.") && !args.empty() &&
          args[0]->kind == AstKind::ObjectLiteral) {
        for (const AstNode* prop : ast.children_of(*args[0], AstRole::Property)) {
          if (prop->kind != AstKind::Property) continue;
          if (prop->str_value != "success" && prop->str_value != "fail" &&
              prop->str_value != "complete")
            continue;
          const AstNode* value = ast.child(*prop, AstRole::Value);
          if (!value || value->kind != AstKind::FunctionDef) continue;
          auto params = function_params(ast, value->id);
          if (params.empty() || params[0].empty()) continue;
          int from = u.intern({DataObject::Kind::ApiResult, file, callee_path});
          int to = u.intern({DataObject::Kind::JsVar, file, params[0]});
          u.add_edge({UdfgEdge::Label::Return, from, to, file, n.id});
        }
      }

      // Argument passing into resolvable callees.
      if (auto target_fn = find_callee_fn(n)) {
        const AstGraph& cg = *target_fn->first;
        const auto& params = target_fn->second->params;
        for (size_t i = 0; i < args.size() && i < params.size(); ++i) {
          if (params[i].empty() || args[i]->kind == AstKind::ThisExpression) continue;
          int to = u.intern({DataObject::Kind::JsVar, cg.file, params[i]});
          std::vector<int> sources;
          detail::value_sources(u, ast, page, args[i]->id, sources);
          for (int s : sources)
            u.add_edge({UdfgEdge::Label::ArgumentPass, s, to, file, n.id});
        }
      }
    }

    // Event payloads for statically declared handlers.
    if (!page.empty()) {
      auto bc_it = bind_calls_by_page.find(page);
      if (bc_it != bind_calls_by_page.end()) {
        std::set<std::string> seen;
        for (const BindCall& bc : bc_it->second) {
          if (!seen.insert(bc.handler).second) continue;
          auto m = methods.find(bc.handler);
          if (m == methods.end()) continue;
          auto params = function_params(ast, m->second);
          if (params.empty() || params[0].empty()) continue;
          int from = u.intern({DataObject::Kind::EventPayload, page, bc.handler});
          int to = u.intern({DataObject::Kind::JsVar, file, params[0]});
          u.add_edge({UdfgEdge::Label::EventPropagation, from, to, file, m->second});
        }
      }
    }
  }

  // Event payloads for handlers installed across files.
  for (const ExCall& ex : all_excalls) {
    auto mod_it = asts.find(ex.defining_file);
    if (mod_it == asts.end()) continue;
    const AstGraph& mod = mod_it->second;
    if (mod.node(ex.defining_node_id).kind != AstKind::FunctionDef) continue;
    auto params = function_params(mod, ex.defining_node_id);
    if (params.empty() || params[0].empty()) continue;
    std::string page = page_of(ex.installer_file);
    int from = u.intern({DataObject::Kind::EventPayload, page, ex.handler_name});
    int to = u.intern({DataObject::Kind::JsVar, ex.defining_file, params[0]});
    u.add_edge({UdfgEdge::Label::EventPropagation, from, to, ex.defining_file, ex.install_site});
  }

  // Markup bindings read page data fields.
  for (const auto& [page, refs] : bindings_by_page) {
    for (const DataBindingRef& ref : refs) {
      int to = u.intern({DataObject::Kind::WxmlBinding, page, ref.expr});
      for (const std::string& root : detail::binding_roots(ref.expr)) {
        int from = u.intern({DataObject::Kind::PageDataField, page, root});
        u.add_edge({UdfgEdge::Label::DataBinding, from, to, page + ".wxml", -1});
      }
    }
  }

  return u;
}

// Every string constant that can flow into (file, var): backward
// reachability over all edge labels, collecting string literal nodes.
// Sorted and deduplicated so callers emit deterministic results.
inline std::vector<std::string> collect_string_constants(const Udfg& u, const std::string& file,
                                                         const std::string& var) {
  int start = u.find({DataObject::Kind::JsVar, file, var});
  if (start < 0) return {};
  std::vector<std::vector<int>> preds(u.nodes.size());
  for (const UdfgEdge& e : u.edges) preds[static_cast<size_t>(e.to)].push_back(e.from);
  std::set<int> seen = {start};
  std::vector<int> frontier = {start};
  std::set<std::string> constants;
  while (!frontier.empty()) {
    int cur = frontier.back();
    frontier.pop_back();
    const DataObject& d = u.nodes[static_cast<size_t>(cur)];
    if (d.kind == DataObject::Kind::Literal && d.owner == "str") constants.insert(d.name);
    for (int p : preds[static_cast<size_t>(cur)])
      if (seen.insert(p).second) frontier.push_back(p);
  }
  return {constants.begin(), constants.end()};
}

}  // namespace miniscope
