#pragma once

/// Pipeline driver behind the command-line tool.
///
/// Exit codes, total across all commands:
///   0  success, results consistent
///   1  fatal error (bad inputs, nothing written)
///   2  results written, but diagnostics or dead-code findings present
///   3  cross-validation found redundant disclosures only
///   4  cross-validation found omitted disclosures
///
/// Every output file is JSON with sorted keys and stable array order;
/// identical inputs produce byte-identical outputs.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "miniscope/api_catalog.hpp"
#include "miniscope/explorer.hpp"
#include "miniscope/mdg.hpp"
#include "miniscope/package.hpp"
#include "miniscope/policy.hpp"
#include "miniscope/practices.hpp"
#include "miniscope/runtime.hpp"

namespace miniscope {

struct RunConfig {
  std::string package_root;
  std::string runtime_manifest;  // optional; required for phase 2
  std::string policy_file;       // optional; required for check
  std::string lexicon_file;      // falls back to the MINISCOPE_LEXICON env var
  std::string output_dir = ".";
  int phase_limit = 2;
  std::string format = "json";
};

namespace detail {

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_file(path, j.dump(2) + "\n");
}

// Lexicons for a run: explicit flag, then environment, then built-in
// defaults (catalog only; no verbs or entity table).
inline Lexicons run_lexicons(const RunConfig& config, bool required) {
  std::string path = config.lexicon_file;
  if (path.empty())
    if (const char* env = std::getenv("MINISCOPE_LEXICON")) path = env;
  if (path.empty()) {
    if (required)
      throw Error(ErrorCode::InvalidConfig,
                  "a lexicon file is required (--lexicon or MINISCOPE_LEXICON)");
    Lexicons lex;
    lex.first_party_cues = default_first_party_cues();
    lex.catalog = ApiCatalog::builtin();
    return lex;
  }
  return load_lexicons(path);
}

inline bool any_dead_code(const std::vector<PrivacyPractice>& practices) {
  for (const PrivacyPractice& p : practices)
    if (p.verdict == "dead-code") return true;
  return false;
}

// The merged package as a directory that analyze can consume again:
// a flattened manifest, every loaded page, and the main package's
// scripts for module resolution.
inline void write_merged_package(const MiniAppPackage& pkg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json app;
  nlohmann::json pages = nlohmann::json::array();
  for (const std::string& p : pkg.manifest.page_paths) pages.push_back(p);
  for (const SubpackageSpec& sp : pkg.subpackages)
    if (sp.loaded)
      for (const std::string& p : sp.page_paths) pages.push_back(p);
  app["pages"] = std::move(pages);
  if (!pkg.manifest.tab_bar_pages.empty()) {
    nlohmann::json list = nlohmann::json::array();
    for (const std::string& t : pkg.manifest.tab_bar_pages) list.push_back({{"pagePath", t}});
    app["tabBar"] = {{"list", std::move(list)}};
  }
  nlohmann::json subpackages = nlohmann::json::array();
  for (const SubpackageSpec& sp : pkg.subpackages) {
    if (sp.loaded) continue;
    nlohmann::json decl;
    decl["root"] = sp.root_prefix;
    nlohmann::json sub_pages = nlohmann::json::array();
    for (const std::string& p : sp.page_paths)
      sub_pages.push_back(p.substr(sp.root_prefix.size() + 1));
    decl["pages"] = std::move(sub_pages);
    subpackages.push_back(std::move(decl));
  }
  if (!subpackages.empty()) app["subpackages"] = std::move(subpackages);
  write_json(dir / "app.json", app);

  for (const PageUnit& unit : pkg.pages) {
    std::filesystem::path base = dir / unit.path;
    std::filesystem::create_directories(base.parent_path());
    if (!unit.wxml_source.empty()) write_file((base.string() + ".wxml"), unit.wxml_source);
    if (!unit.js_source.empty()) write_file((base.string() + ".js"), unit.js_source);
  }

  // Scripts that are not pages (app.js, shared modules) copy through.
  std::set<std::string> unit_files;
  for (const PageUnit& unit : pkg.pages) {
    unit_files.insert(unit.path + ".js");
    unit_files.insert(unit.path + ".wxml");
  }
  std::filesystem::path root(pkg.root);
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    if (ext != ".js" && ext != ".wxml") continue;
    std::string rel = std::filesystem::relative(entry.path(), root).generic_string();
    if (unit_files.count(rel)) continue;
    std::filesystem::path target = dir / rel;
    std::filesystem::create_directories(target.parent_path());
    std::filesystem::copy_file(entry.path(), target,
                               std::filesystem::copy_options::overwrite_existing);
  }
}

}  // namespace detail

inline int cmd_analyze(const RunConfig& config) {
  try {
    Lexicons lex = detail::run_lexicons(config, /*required=*/false);
    MiniAppPackage pkg = load_package(config.package_root);
    Mdg mdg = build_mdg(pkg);
    std::vector<PrivacyPractice> practices = reachable_practices(mdg, lex.catalog);

    std::filesystem::path out(config.output_dir);
    detail::write_json(out / "mdg.json", to_json(mdg));
    detail::write_json(out / "practices.json", practices_to_json(practices, mdg.phase));
    return mdg.diagnostics.empty() && !detail::any_dead_code(practices) ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

inline int cmd_explore(const RunConfig& config) {
  try {
    if (config.runtime_manifest.empty())
      throw Error(ErrorCode::InvalidConfig, "explore needs --runtime <manifest.json>");
    Lexicons lex = detail::run_lexicons(config, /*required=*/false);
    MiniAppPackage pkg = load_package(config.package_root);
    Mdg mdg = build_mdg(pkg);
    RuntimeManifest manifest = load_runtime_manifest(config.runtime_manifest);
    SimulatedRuntime rt(manifest);
    rt.launch();

    BfsResult phase1 = explore_bfs_subpackages(mdg, rt);

    MiniAppPackage complete_pkg = pkg;
    for (const auto& [root, dir] : phase1.loaded) {
      std::filesystem::path content(dir);
      if (content.is_relative()) content = std::filesystem::path(pkg.root) / content;
      complete_pkg = merge_subpackage(complete_pkg, root, content);
    }
    Mdg complete = build_mdg(complete_pkg);
    std::vector<PrivacyPractice> practices = reachable_practices(complete, lex.catalog);

    std::filesystem::path out(config.output_dir);
    detail::write_merged_package(complete_pkg, out / "merged");
    detail::write_json(out / "mdg_complete.json", to_json(complete));
    detail::write_json(out / "practices_complete.json", practices_to_json(practices, complete.phase));

    nlohmann::json traces;
    traces["phase1"] = to_json(phase1.trace);
    bool diags = !phase1.trace.diagnostics.empty() || !complete.diagnostics.empty();
    if (config.phase_limit >= 2) {
      ExplorationTrace phase2 = explore_dfs_practices(complete, rt, lex.catalog);
      traces["phase2"] = to_json(phase2);
      diags = diags || !phase2.diagnostics.empty();
    }
    detail::write_json(out / "trace.json", traces);
    return diags ? 2 : 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

inline int cmd_check(const RunConfig& config) {
  try {
    if (config.policy_file.empty())
      throw Error(ErrorCode::InvalidConfig, "check needs --policy <policy.txt>");
    auto policy_text = read_file(config.policy_file);
    if (!policy_text) throw Error(ErrorCode::IoError, "cannot read policy " + config.policy_file);
    Lexicons lex = detail::run_lexicons(config, /*required=*/true);

    MiniAppPackage pkg = load_package(config.package_root);
    std::vector<PrivacyPractice> practices;
    std::vector<ObservedApiEvent> dynamic_observed;

    if (!config.runtime_manifest.empty()) {
      Mdg mdg = build_mdg(pkg);
      RuntimeManifest manifest = load_runtime_manifest(config.runtime_manifest);
      SimulatedRuntime rt(manifest);
      rt.launch();
      BfsResult phase1 = explore_bfs_subpackages(mdg, rt);
      MiniAppPackage complete_pkg = pkg;
      for (const auto& [root, dir] : phase1.loaded) {
        std::filesystem::path content(dir);
        if (content.is_relative()) content = std::filesystem::path(pkg.root) / content;
        complete_pkg = merge_subpackage(complete_pkg, root, content);
      }
      Mdg complete = build_mdg(complete_pkg);
      practices = reachable_practices(complete, lex.catalog);
      if (config.phase_limit >= 2) {
        ExplorationTrace phase2 = explore_dfs_practices(complete, rt, lex.catalog);
        dynamic_observed = trace_events(phase2);
      }
      for (const ObservedApiEvent& e : trace_events(phase1.trace)) dynamic_observed.push_back(e);
    } else {
      Mdg mdg = build_mdg(pkg);
      practices = reachable_practices(mdg, lex.catalog);
    }

    std::vector<PrivacyStatement> statements = extract_statements(*policy_text, lex);
    InconsistencyReport report = cross_validate(practices, statements, dynamic_observed, lex.catalog);

    detail::write_json(std::filesystem::path(config.output_dir) / "report.json", to_json(report));
    if (!report.omitted.empty()) return 4;
    if (!report.redundant.empty()) return 3;
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace miniscope
