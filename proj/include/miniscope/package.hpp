#pragma once

/// Package model: the unpacked MiniApp directory, its manifest, page
/// sources and subpackage declarations.
///
/// Directory layout:
///   <root>/app.json                     manifest (required)
///   <root>/app.js                       application script (optional)
///   <root>/<page-path>.wxml|.js         one pair per declared page
///
/// Manifest schema (keys are case-sensitive):
///   {
///     "pages": ["pages/home/index", ...],
///     "tabBar": { "list": [{ "pagePath": "pages/home/index" }, ...] },
///     "subpackages": [{ "root": "pages/sub", "pages": ["index", ...] }]
///   }
///
/// Subpackage page entries are relative to their root; the full page path
/// is root + "/" + entry and must stay under the root prefix. Packages are
/// immutable values: merging a downloaded subpackage returns a new package
/// and never mutates the input.

#include <filesystem>
#include <json.hpp>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "miniscope/common.hpp"

namespace miniscope {

struct Manifest {
  struct SubpackageDecl {
    std::string root_prefix;
    std::vector<std::string> page_paths;  // full, normalized
  };

  std::vector<std::string> page_paths;    // main package, manifest order
  std::vector<std::string> tab_bar_pages;
  std::vector<SubpackageDecl> subpackages;
};

struct PageUnit {
  std::string path;  // normalized page path
  std::string wxml_source;
  std::string js_source;
  std::string subpackage_root;  // empty for main-package pages
};

struct SubpackageSpec {
  std::string root_prefix;
  std::vector<std::string> page_paths;
  bool loaded = false;
  std::filesystem::path source_dir;  // where the files came from, once loaded
};

struct MiniAppPackage {
  std::filesystem::path root;
  Manifest manifest;
  std::vector<PageUnit> pages;          // main pages first (manifest order)
  std::vector<SubpackageSpec> subpackages;
  bool complete = false;                // all declared subpackages loaded
  Diagnostics diagnostics;

  const PageUnit* find_page(std::string_view path) const {
    for (const PageUnit& p : pages)
      if (p.path == path) return &p;
    return nullptr;
  }

  // First manifest page; the page the application opens on.
  std::string launch_page() const {
    return manifest.page_paths.empty() ? std::string{} : manifest.page_paths.front();
  }
};

enum class PageScope { Main, Loaded, AllDeclared };

namespace detail {

inline std::string require_normalized(std::string_view raw, const char* what) {
  auto norm = normalize_page_path(raw);
  if (!norm)
    throw Error(ErrorCode::MalformedManifest,
                std::string(what) + " path '" + std::string(raw) + "' is not a valid page path");
  return *norm;
}

inline Manifest parse_manifest(const nlohmann::json& j, Diagnostics& diags) {
  Manifest m;
  if (!j.is_object() || !j.contains("pages") || !j["pages"].is_array())
    throw Error(ErrorCode::MalformedManifest, "manifest must declare a \"pages\" array");
  for (const auto& p : j["pages"]) {
    if (!p.is_string())
      throw Error(ErrorCode::MalformedManifest, "\"pages\" entries must be strings");
    m.page_paths.push_back(require_normalized(p.get<std::string>(), "page"));
  }
  if (j.contains("tabBar")) {
    const auto& tb = j["tabBar"];
    if (tb.is_object() && tb.contains("list") && tb["list"].is_array()) {
      for (const auto& item : tb["list"]) {
        if (!item.is_object() || !item.contains("pagePath") || !item["pagePath"].is_string())
          continue;
        std::string path = require_normalized(item["pagePath"].get<std::string>(), "tabBar");
        if (std::find(m.page_paths.begin(), m.page_paths.end(), path) == m.page_paths.end()) {
          diags.push_back({"tab-outside-pages",
                           "tabBar page '" + path + "' is not in the main \"pages\" list; dropped",
                           "app.json"});
          continue;
        }
        m.tab_bar_pages.push_back(path);
      }
    }
  }
  if (j.contains("subpackages") && j["subpackages"].is_array()) {
    for (const auto& sp : j["subpackages"]) {
      if (!sp.is_object() || !sp.contains("root") || !sp["root"].is_string())
        throw Error(ErrorCode::MalformedManifest, "subpackage entries need a string \"root\"");
      Manifest::SubpackageDecl decl;
      decl.root_prefix = require_normalized(sp["root"].get<std::string>(), "subpackage root");
      if (sp.contains("pages") && sp["pages"].is_array()) {
        for (const auto& p : sp["pages"]) {
          if (!p.is_string()) continue;
          decl.page_paths.push_back(
              require_normalized(decl.root_prefix + "/" + p.get<std::string>(), "subpackage page"));
        }
      }
      m.subpackages.push_back(std::move(decl));
    }
  }
  return m;
}

inline PageUnit load_page_unit(const std::filesystem::path& root, const std::string& path,
                               const std::string& subpackage_root, Diagnostics& diags,
                               bool* any_file = nullptr) {
  PageUnit unit;
  unit.path = path;
  unit.subpackage_root = subpackage_root;
  auto wxml = read_file(root / (path + ".wxml"));
  auto js = read_file(root / (path + ".js"));
  if (any_file) *any_file = wxml.has_value() || js.has_value();
  if (wxml) unit.wxml_source = *wxml;
  else diags.push_back({"missing-wxml", "no template file for page '" + path + "'", path});
  if (js) unit.js_source = *js;
  else diags.push_back({"missing-js", "no script file for page '" + path + "'", path});
  return unit;
}

}  // namespace detail

inline MiniAppPackage load_package(const std::filesystem::path& root) {
  MiniAppPackage pkg;
  pkg.root = root;
  auto manifest_text = read_file(root / "app.json");
  if (!manifest_text)
    throw Error(ErrorCode::MissingManifest, "no app.json under " + root.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(*manifest_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedManifest, std::string("app.json: ") + e.what());
  }
  pkg.manifest = detail::parse_manifest(j, pkg.diagnostics);

  std::set<std::string> seen;
  auto check_unique = [&](const std::string& path) {
    if (!seen.insert(path).second)
      throw Error(ErrorCode::DuplicatePagePath, "page '" + path + "' declared more than once");
  };
  for (const std::string& p : pkg.manifest.page_paths) check_unique(p);
  for (const auto& decl : pkg.manifest.subpackages)
    for (const std::string& p : decl.page_paths) check_unique(p);

  for (const std::string& path : pkg.manifest.page_paths) {
    bool any_file = false;
    PageUnit unit = detail::load_page_unit(root, path, "", pkg.diagnostics, &any_file);
    if (!any_file)
      throw Error(ErrorCode::DanglingManifestEntry,
                  "declared page '" + path + "' has no .wxml or .js file");
    pkg.pages.push_back(std::move(unit));
  }

  for (const auto& decl : pkg.manifest.subpackages) {
    SubpackageSpec spec;
    spec.root_prefix = decl.root_prefix;
    spec.page_paths = decl.page_paths;
    pkg.subpackages.push_back(std::move(spec));
  }
  pkg.complete = pkg.subpackages.empty();
  return pkg;
}

// Merges the downloaded files of one declared subpackage, producing a new
// package whose page set is a strict superset of the input's. `dir` holds
// the subpackage files either relative to the root prefix (dir/index.js)
// or mirroring full package paths (dir/pages/sub/index.js).
inline MiniAppPackage merge_subpackage(const MiniAppPackage& pkg, const std::string& root_prefix,
                                       const std::filesystem::path& dir) {
  MiniAppPackage out = pkg;
  SubpackageSpec* spec = nullptr;
  for (SubpackageSpec& s : out.subpackages)
    if (s.root_prefix == root_prefix) spec = &s;
  if (!spec)
    throw Error(ErrorCode::UnknownSubpackage, "no declared subpackage with root '" + root_prefix + "'");
  if (spec->loaded)
    throw Error(ErrorCode::UnknownSubpackage, "subpackage '" + root_prefix + "' already loaded");
  if (!std::filesystem::is_directory(dir))
    throw Error(ErrorCode::IoError, "subpackage directory " + dir.string() + " does not exist");

  // A nested manifest may not declare further subpackages.
  if (auto nested = read_file(dir / "app.json")) {
    auto nj = nlohmann::json::parse(*nested, nullptr, /*allow_exceptions=*/false);
    if (nj.is_object() && nj.contains("subpackages") && nj["subpackages"].is_array() &&
        !nj["subpackages"].empty())
      out.diagnostics.push_back({"nested-subpackage",
                                 "subpackage '" + root_prefix +
                                     "' declares nested subpackages; declaration ignored",
                                 root_prefix});
  }

  std::set<std::string> existing;
  for (const PageUnit& p : out.pages) existing.insert(p.path);

  // Map each source file to its page path and validate the prefix.
  std::set<std::string> found;  // page paths with at least one file in dir
  std::map<std::string, std::filesystem::path> base_for;  // page path -> dir holding the pair
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    if (ext != ".wxml" && ext != ".js") continue;
    std::string rel = std::filesystem::relative(entry.path(), dir).generic_string();
    auto norm = normalize_page_path(rel);
    if (!norm) continue;
    // Paths that open with the root's first segment are package-absolute
    // (the dir mirrors the package layout); anything else is relative to
    // the root prefix.
    std::string first_seg = root_prefix.substr(0, root_prefix.find('/'));
    std::string full;
    if (*norm == root_prefix || norm->starts_with(root_prefix + "/") || *norm == first_seg ||
        norm->starts_with(first_seg + "/"))
      full = *norm;
    else
      full = root_prefix + "/" + *norm;
    if (!(full == root_prefix) && !full.starts_with(root_prefix + "/"))
      throw Error(ErrorCode::PageOutsidePrefix,
                  "file '" + rel + "' resolves to '" + full + "' outside root '" + root_prefix + "'");
    // Only rendered templates announce a page; a lone .js file is a module.
    if (ext == ".wxml") {
      found.insert(full);
      base_for[full] = dir;
    }
  }

  // Declared pages load first (in declaration order), then any extra page
  // files found in the directory, in sorted order.
  std::vector<std::string> to_load = spec->page_paths;
  for (const std::string& f : found)
    if (std::find(to_load.begin(), to_load.end(), f) == to_load.end()) {
      out.diagnostics.push_back(
          {"undeclared-subpackage-page", "page '" + f + "' is not declared in the manifest", f});
      to_load.push_back(f);
    }

  for (const std::string& path : to_load) {
    if (existing.count(path))
      throw Error(ErrorCode::DuplicatePagePath,
                  "merged page '" + path + "' collides with an existing page");
    std::filesystem::path base = base_for.count(path) ? base_for[path] : dir;
    // Prefix-relative layout stores "index.wxml" for page "<root>/index".
    std::string rel = path;
    if (!std::filesystem::exists(base / (rel + ".wxml")) &&
        !std::filesystem::exists(base / (rel + ".js")) && path.starts_with(root_prefix + "/"))
      rel = path.substr(root_prefix.size() + 1);
    PageUnit unit = detail::load_page_unit(base, rel, "", out.diagnostics);
    unit.path = path;
    unit.subpackage_root = root_prefix;
    out.pages.push_back(std::move(unit));
    existing.insert(path);
  }

  spec->loaded = true;
  spec->source_dir = dir;
  out.complete = true;
  for (const SubpackageSpec& s : out.subpackages)
    if (!s.loaded) out.complete = false;
  return out;
}

inline std::vector<std::string> list_pages(const MiniAppPackage& pkg, PageScope scope) {
  std::vector<std::string> out;
  switch (scope) {
    case PageScope::Main:
      for (const PageUnit& p : pkg.pages)
        if (p.subpackage_root.empty()) out.push_back(p.path);
      break;
    case PageScope::Loaded:
      for (const PageUnit& p : pkg.pages) out.push_back(p.path);
      break;
    case PageScope::AllDeclared:
      out = pkg.manifest.page_paths;
      for (const auto& decl : pkg.manifest.subpackages)
        for (const std::string& p : decl.page_paths) out.push_back(p);
      break;
  }
  return out;
}

// Subpackage root that owns `page`, or empty for main-package pages.
inline std::string subpackage_root_of(const MiniAppPackage& pkg, std::string_view page) {
  for (const auto& spec : pkg.subpackages)
    for (const std::string& p : spec.page_paths)
      if (p == page) return spec.root_prefix;
  return {};
}

}  // namespace miniscope
