#pragma once

/// Callback control-flow layer.
///
/// Nodes are function definitions (page methods, app methods, module
/// functions, dynamically installed handlers); edges connect entry events
/// and functions:
///   lifecycle          entry event -> lifecycle method
///   gui-event          entry event -> bound handler (static or installed)
///   direct-call        caller -> callee for this.f(), mod.f(), f()
///   dynamic-definition installer function -> handler it installs on a
///                      page context received as an argument
///
/// The dynamic-definition machinery: a page passes `this` into an
/// imported module function; that function assigns handlers onto the
/// received context. The handler name must match a markup binding for the
/// assignment to count.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "miniscope/common.hpp"
#include "miniscope/js_ast.hpp"
#include "miniscope/package.hpp"
#include "miniscope/wxml.hpp"

namespace miniscope {

// Lifecycle property names recognized as entry events.
inline const std::set<std::string>& lifecycle_names() {
  static const std::set<std::string> names = {"onLaunch", "onShow", "onHide",
                                              "onLoad",   "onReady", "onUnload"};
  return names;
}

// ---- imported modules ----

// specifier -> module file path, normalized relative to the importer.
using ImportMap = std::map<std::string, std::string>;

// Collects ES imports and CommonJS require declarators. A require with a
// non-literal argument is skipped with a diagnostic.
inline ImportMap get_imported_modules(const AstGraph& g, Diagnostics* diags = nullptr) {
  ImportMap out;
  for (const AstNode& n : g.nodes) {
    if (n.kind == AstKind::ImportDeclaration) {
      const AstNode* source = g.child(n, AstRole::Source);
      if (!source) continue;
      auto path = resolve_import(g.file, source->str_value);
      if (!path) continue;
      for (const AstNode* spec : g.children_of(n, AstRole::Specifier))
        out.emplace(spec->str_value, *path);
      continue;
    }
    if (n.kind == AstKind::VariableDeclarator) {
      const AstNode* id = g.child(n, AstRole::Id);
      const AstNode* init = g.child(n, AstRole::Init);
      if (!id || !init || id->kind != AstKind::Identifier ||
          init->kind != AstKind::CallExpression)
        continue;
      const AstNode* callee = g.child(*init, AstRole::Callee);
      if (!callee || callee->kind != AstKind::Identifier || callee->str_value != "require")
        continue;
      auto args = g.children_of(*init, AstRole::Argument);
      if (args.empty() || args[0]->kind != AstKind::StringLiteral) {
        if (diags)
          diags->push_back({"non-literal-require",
                            "require() with a non-literal argument cannot be resolved",
                            g.file + "#" + std::to_string(n.id)});
        continue;
      }
      auto path = resolve_import(g.file, args[0]->str_value);
      if (path) out.emplace(id->str_value, *path);
    }
  }
  return out;
}

// ---- cross-file callbacks ----

// A handler installed on a page context by an imported module function.
struct ExCall {
  std::string handler_name;     // markup event handler being satisfied
  std::string defining_file;    // module file holding the handler body
  int defining_node_id = -1;    // the assigned function (or RHS) node
  int install_site = -1;        // the assignment inside the module
  std::string installer_file;   // page file holding the cross-file call
  int installer_call = -1;      // the call that passes `this`
  std::string installer_fn;     // module function receiving the context
  int installer_fn_node = -1;   // its FunctionDef in the module file

  auto operator<=>(const ExCall&) const = default;
};

// Call sites in a page file that pass `this` into an imported module.
struct ContextBinding {
  std::string page_file;
  int call_node = -1;       // the cross-file CallExpression
  int this_arg = -1;        // the ThisExpression argument
  std::string module_file;
  std::string fn_name;      // module function receiving the context
  int fn_node = -1;
  std::string param_name;   // context parameter inside the module function
};

namespace detail {

// Resolves a call's callee through the import map: `util.init(...)` via
// specifier `util`, or `init(...)` via a named import. Returns the module
// file and the function name expected inside it.
inline std::optional<std::pair<std::string, std::string>> imported_callee(
    const AstGraph& g, const AstNode& call, const ImportMap& imports) {
  const AstNode* callee = g.child(call, AstRole::Callee);
  if (!callee) return std::nullopt;
  if (callee->kind == AstKind::MemberExpression) {
    const AstNode* obj = g.child(*callee, AstRole::Object);
    const AstNode* prop = g.child(*callee, AstRole::Property);
    if (!obj || !prop || obj->kind != AstKind::Identifier ||
        prop->kind != AstKind::Identifier)
      return std::nullopt;
    auto it = imports.find(obj->str_value);
    if (it == imports.end()) return std::nullopt;
    return std::make_pair(it->second, prop->str_value);
  }
  if (callee->kind == AstKind::Identifier) {
    auto it = imports.find(callee->str_value);
    if (it == imports.end()) return std::nullopt;
    return std::make_pair(it->second, callee->str_value);
  }
  return std::nullopt;
}

}  // namespace detail

// Finds the calls that pass the page context into imported modules and
// resolves the receiving parameter. Modules missing from `module_asts`
// are reported and skipped.
inline std::vector<ContextBinding> resolve_context_bindings(
    const AstGraph& page_ast, const ImportMap& imports,
    const std::map<std::string, AstGraph>& module_asts, Diagnostics* diags = nullptr) {
  std::vector<ContextBinding> out;
  for (const AstNode& n : page_ast.nodes) {
    if (n.kind != AstKind::CallExpression) continue;
    auto resolved = detail::imported_callee(page_ast, n, imports);
    if (!resolved) continue;
    auto args = page_ast.children_of(n, AstRole::Argument);
    int this_pos = -1;
    for (size_t i = 0; i < args.size(); ++i)
      if (args[i]->kind == AstKind::ThisExpression) { this_pos = static_cast<int>(i); break; }
    if (this_pos < 0) continue;
    auto mod_it = module_asts.find(resolved->first);
    if (mod_it == module_asts.end()) {
      if (diags)
        diags->push_back({"module-not-found",
                          "imported module '" + resolved->first + "' was not loaded",
                          page_ast.file + "#" + std::to_string(n.id)});
      continue;
    }
    for (const NamedFunction& fn : named_functions(mod_it->second)) {
      if (fn.name != resolved->second) continue;
      if (static_cast<size_t>(this_pos) >= fn.params.size() || fn.params[this_pos].empty())
        break;
      ContextBinding b;
      b.page_file = page_ast.file;
      b.call_node = n.id;
      b.this_arg = args[static_cast<size_t>(this_pos)]->id;
      b.module_file = resolved->first;
      b.fn_name = fn.name;
      b.fn_node = fn.fn_node;
      b.param_name = fn.params[static_cast<size_t>(this_pos)];
      out.push_back(std::move(b));
      break;
    }
  }
  return out;
}

// For every cross-file context binding, scans the receiving function for
// assignments `ctx.<name> = <fn>` where <name> is bound in markup, and
// emits one ExCall per installed handler.
inline std::vector<ExCall> get_crossfile_callbacks(
    const AstGraph& page_ast, const ImportMap& imports,
    const std::vector<BindCall>& bind_calls,
    const std::map<std::string, AstGraph>& module_asts, Diagnostics* diags = nullptr) {
  std::set<std::string> bound_handlers;
  for (const BindCall& bc : bind_calls) bound_handlers.insert(bc.handler);

  std::vector<ExCall> out;
  for (const ContextBinding& b :
       resolve_context_bindings(page_ast, imports, module_asts, diags)) {
    const AstGraph& mod = module_asts.at(b.module_file);
    const AstNode& fn = mod.node(b.fn_node);
    for (int id = fn.id; id < fn.subtree_end; ++id) {
      const AstNode& m = mod.node(id);
      if (m.kind != AstKind::MemberExpression) continue;
      const AstNode* obj = mod.child(m, AstRole::Object);
      const AstNode* prop = mod.child(m, AstRole::Property);
      if (!obj || !prop || obj->kind != AstKind::Identifier ||
          obj->str_value != b.param_name || prop->kind != AstKind::Identifier)
        continue;
      if (!bound_handlers.count(prop->str_value)) continue;
      int parent = mod.parent[static_cast<size_t>(m.id)];
      if (parent < 0) continue;
      const AstNode& holder = mod.node(parent);
      if (holder.kind != AstKind::Assignment) continue;
      const AstNode* left = mod.child(holder, AstRole::Left);
      const AstNode* right = mod.child(holder, AstRole::Right);
      if (!left || left->id != m.id || !right) continue;
      ExCall ex;
      ex.handler_name = prop->str_value;
      ex.defining_file = b.module_file;
      ex.defining_node_id = right->id;
      ex.install_site = holder.id;
      ex.installer_file = b.page_file;
      ex.installer_call = b.call_node;
      ex.installer_fn = b.fn_name;
      ex.installer_fn_node = b.fn_node;
      out.push_back(std::move(ex));
    }
  }
  return out;
}

// ---- entry points ----

struct EntryEvent {
  enum class Kind { Lifecycle, Gui };
  Kind kind = Kind::Lifecycle;
  std::string page;       // page path; empty for app-level events
  std::string lifecycle;  // lifecycle name, when Kind::Lifecycle
  BindCall bind;          // the markup binding, when Kind::Gui
  std::string handler;    // handler function name
  bool pending_dynamic = false;  // no static method of that name on the page

  auto operator<=>(const EntryEvent&) const = default;
};

// Page/app methods declared on the registration object.
inline std::map<std::string, int> registration_methods(const AstGraph& g) {
  std::map<std::string, int> out;
  auto reg = find_registration(g);
  if (!reg) return out;
  const AstNode& obj = g.node(reg->object_node);
  for (const AstNode* prop : g.children_of(obj, AstRole::Property)) {
    if (prop->kind != AstKind::Property) continue;
    const AstNode* value = g.child(*prop, AstRole::Value);
    if (value && value->kind == AstKind::FunctionDef) out.emplace(prop->str_value, value->id);
  }
  return out;
}

// One entry per lifecycle method plus one per markup binding. A binding
// with no matching static method is flagged pending-dynamic; it may still
// resolve through a cross-file installer.
inline std::vector<EntryEvent> find_entry_points(const AstGraph& ast, const std::string& page,
                                                 const std::vector<BindCall>& bind_calls) {
  std::vector<EntryEvent> out;
  auto methods = registration_methods(ast);
  for (const auto& [name, fn] : methods) {
    if (!lifecycle_names().count(name)) continue;
    EntryEvent e;
    e.kind = EntryEvent::Kind::Lifecycle;
    e.page = page;
    e.lifecycle = name;
    e.handler = name;
    out.push_back(std::move(e));
  }
  for (const BindCall& bc : bind_calls) {
    EntryEvent e;
    e.kind = EntryEvent::Kind::Gui;
    e.page = page;
    e.bind = bc;
    e.handler = bc.handler;
    e.pending_dynamic = !methods.count(bc.handler);
    out.push_back(std::move(e));
  }
  return out;
}

// ---- the layer itself ----

struct FunctionRef {
  std::string file;
  std::string page;  // owning page path, empty for shared modules / app
  std::string name;
  int ast_node_id = -1;

  auto operator<=>(const FunctionRef&) const = default;
};

struct CcfgEdge {
  enum class Kind { Lifecycle, GuiEvent, DirectCall, DynamicDefinition };
  Kind kind = Kind::DirectCall;
  int entry = -1;      // index into Ccfg::entries for lifecycle/gui edges
  int from_fn = -1;    // index into Ccfg::functions for call/definition edges
  int to_fn = -1;      // index into Ccfg::functions
  std::string site_file;  // file of the anchoring call/assignment
  int site_node = -1;

  auto operator<=>(const CcfgEdge&) const = default;
};

inline const char* to_string(CcfgEdge::Kind k) {
  switch (k) {
    case CcfgEdge::Kind::Lifecycle: return "lifecycle";
    case CcfgEdge::Kind::GuiEvent: return "gui-event";
    case CcfgEdge::Kind::DirectCall: return "direct-call";
    case CcfgEdge::Kind::DynamicDefinition: return "dynamic-definition";
  }
  return "?";
}

struct Ccfg {
  std::vector<FunctionRef> functions;
  std::vector<EntryEvent> entries;
  std::vector<CcfgEdge> edges;
  std::vector<ExCall> ex_calls;
  Diagnostics diagnostics;

  int find_function(std::string_view file, std::string_view name) const {
    for (size_t i = 0; i < functions.size(); ++i)
      if (functions[i].file == file && functions[i].name == name) return static_cast<int>(i);
    return -1;
  }

  int function_at(std::string_view file, int ast_node_id) const {
    for (size_t i = 0; i < functions.size(); ++i)
      if (functions[i].file == file && functions[i].ast_node_id == ast_node_id)
        return static_cast<int>(i);
    return -1;
  }
};

namespace detail {

// Function index of the definition enclosing `node_id` in `file`; walks
// outward until an AST function that is also a CCFG node is found.
inline int enclosing_ccfg_function(const Ccfg& ccfg, const AstGraph& g, int node_id) {
  int fn = g.enclosing_function(node_id);
  while (fn >= 0) {
    int idx = ccfg.function_at(g.file, fn);
    if (idx >= 0) return idx;
    fn = g.enclosing_function(fn);
  }
  return -1;
}

}  // namespace detail

// Builds the layer for every loaded page plus app.js and shared modules.
// `asts` maps file path -> parse result and must contain page scripts
// (page path + ".js"); shared modules referenced by imports are looked up
// in the same map.
inline Ccfg build_ccfg(const MiniAppPackage& pkg, const std::map<std::string, AstGraph>& asts,
                       const std::map<std::string, std::vector<BindCall>>& bind_calls_by_page) {
  Ccfg ccfg;

  auto add_function = [&](FunctionRef ref) -> int {
    int existing = ccfg.function_at(ref.file, ref.ast_node_id);
    if (existing >= 0) return existing;
    ccfg.functions.push_back(std::move(ref));
    return static_cast<int>(ccfg.functions.size() - 1);
  };

  // Pass 1: functions. Page and app registration methods first, then
  // named module functions.
  std::map<std::string, std::string> page_of_file;  // js file -> page path
  for (const PageUnit& p : pkg.pages) page_of_file[p.path + ".js"] = p.path;

  for (const auto& [file, ast] : asts) {
    auto page_it = page_of_file.find(file);
    std::string page = page_it == page_of_file.end() ? "" : page_it->second;
    if (!page.empty() || file == "app.js") {
      for (const auto& [name, fn] : registration_methods(ast))
        add_function({file, page, name, fn});
    } else {
      for (const NamedFunction& fn : named_functions(ast))
        add_function({file, page, fn.name, fn.fn_node});
    }
  }

  // Pass 2: entries and cross-file callbacks per page, then app.
  std::vector<ExCall> all_excalls;
  for (const PageUnit& p : pkg.pages) {
    std::string file = p.path + ".js";
    auto ast_it = asts.find(file);
    if (ast_it == asts.end()) continue;
    const AstGraph& ast = ast_it->second;
    auto bc_it = bind_calls_by_page.find(p.path);
    static const std::vector<BindCall> kNoBinds;
    const std::vector<BindCall>& binds = bc_it == bind_calls_by_page.end() ? kNoBinds : bc_it->second;

    for (EntryEvent e : find_entry_points(ast, p.path, binds)) ccfg.entries.push_back(std::move(e));

    ImportMap imports = get_imported_modules(ast, &ccfg.diagnostics);
    for (ExCall ex : get_crossfile_callbacks(ast, imports, binds, asts, &ccfg.diagnostics)) {
      // The installed handler becomes a first-class function node.
      add_function({ex.defining_file, "", ex.handler_name, ex.defining_node_id});
      all_excalls.push_back(std::move(ex));
    }
  }
  if (auto app_it = asts.find("app.js"); app_it != asts.end()) {
    for (EntryEvent e : find_entry_points(app_it->second, "", {}))
      ccfg.entries.push_back(std::move(e));
  }
  ccfg.ex_calls = all_excalls;

  // Pass 3: entry edges.
  for (size_t i = 0; i < ccfg.entries.size(); ++i) {
    const EntryEvent& e = ccfg.entries[i];
    std::string file = e.page.empty() ? "app.js" : e.page + ".js";
    int target = ccfg.find_function(file, e.handler);
    if (target < 0 && e.kind == EntryEvent::Kind::Gui) {
      // Dynamically installed handler: match by name among the handlers
      // installed from this page's file.
      for (const ExCall& ex : all_excalls)
        if (ex.installer_file == file && ex.handler_name == e.handler) {
          target = ccfg.function_at(ex.defining_file, ex.defining_node_id);
          break;
        }
    }
    if (target < 0) {
      ccfg.diagnostics.push_back({"unresolved-handler",
                                  "no function found for handler '" + e.handler + "'",
                                  e.page.empty() ? std::string("app.js") : e.page});
      continue;
    }
    CcfgEdge edge;
    edge.kind = e.kind == EntryEvent::Kind::Lifecycle ? CcfgEdge::Kind::Lifecycle
                                                      : CcfgEdge::Kind::GuiEvent;
    edge.entry = static_cast<int>(i);
    edge.to_fn = target;
    edge.site_file = file;
    edge.site_node = ccfg.functions[static_cast<size_t>(target)].ast_node_id;
    ccfg.edges.push_back(std::move(edge));
  }

  // Pass 4: direct calls.
  for (const auto& [file, ast] : asts) {
    ImportMap imports = get_imported_modules(ast);
    bool has_registration = page_of_file.count(file) || file == "app.js";
    std::string page_file = has_registration ? file : "";
    for (const AstNode& n : ast.nodes) {
      if (n.kind != AstKind::CallExpression) continue;
      const AstNode* callee = ast.child(n, AstRole::Callee);
      if (!callee) continue;
      int target = -1;
      std::string path = member_path(ast, callee->id);
      if (path.starts_with("this.") && !page_file.empty() && path.find('.', 5) == std::string::npos) {
        target = ccfg.find_function(file, path.substr(5));
      } else if (callee->kind == AstKind::Identifier) {
        target = ccfg.find_function(file, callee->str_value);
        if (target < 0) {
          auto imp = imports.find(callee->str_value);
          if (imp != imports.end()) target = ccfg.find_function(imp->second, callee->str_value);
        }
      } else if (auto resolved = detail::imported_callee(ast, n, imports)) {
        target = ccfg.find_function(resolved->first, resolved->second);
      }
      if (target < 0) continue;
      int from = detail::enclosing_ccfg_function(ccfg, ast, n.id);
      if (from < 0) continue;
      CcfgEdge edge;
      edge.kind = CcfgEdge::Kind::DirectCall;
      edge.from_fn = from;
      edge.to_fn = target;
      edge.site_file = file;
      edge.site_node = n.id;
      ccfg.edges.push_back(std::move(edge));
    }
  }

  // Pass 5: dynamic definitions.
  for (const ExCall& ex : all_excalls) {
    int installer = ccfg.function_at(ex.defining_file, ex.installer_fn_node);
    if (installer < 0) installer = ccfg.find_function(ex.defining_file, ex.installer_fn);
    int handler = ccfg.function_at(ex.defining_file, ex.defining_node_id);
    if (installer < 0 || handler < 0) continue;
    CcfgEdge edge;
    edge.kind = CcfgEdge::Kind::DynamicDefinition;
    edge.from_fn = installer;
    edge.to_fn = handler;
    edge.site_file = ex.defining_file;
    edge.site_node = ex.install_site;
    ccfg.edges.push_back(std::move(edge));
  }

  return ccfg;
}

}  // namespace miniscope
