#include <string>

#include "CLI11.hpp"

#include "miniscope/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"MiniApp static analysis, directed exploration, and policy cross-validation"};
  app.require_subcommand(1);

  miniscope::RunConfig config;
  auto add_common = [&](CLI::App* cmd, bool needs_runtime, bool needs_policy) {
    cmd->add_option("--package", config.package_root, "package root directory")->required();
    auto* runtime = cmd->add_option("--runtime", config.runtime_manifest, "runtime manifest JSON");
    if (needs_runtime) runtime->required();
    auto* policy = cmd->add_option("--policy", config.policy_file, "policy text file");
    if (needs_policy) policy->required();
    cmd->add_option("--lexicon", config.lexicon_file,
                    "lexicon/catalog JSON (default: $MINISCOPE_LEXICON)");
    cmd->add_option("--out", config.output_dir, "output directory")->capture_default_str();
    cmd->add_option("--phase", config.phase_limit, "run exploration up to this phase")
        ->check(CLI::IsMember({1, 2}))
        ->capture_default_str();
    cmd->add_option("--format", config.format, "output format")
        ->check(CLI::IsMember({std::string("json")}))
        ->capture_default_str();
  };

  CLI::App* analyze = app.add_subcommand("analyze", "build the dependency graph and practice list");
  add_common(analyze, false, false);
  CLI::App* explore = app.add_subcommand("explore", "run two-phase exploration against a runtime");
  add_common(explore, true, false);
  CLI::App* check = app.add_subcommand("check", "cross-validate practices against a policy");
  add_common(check, false, true);

  CLI11_PARSE(app, argc, argv);

  if (analyze->parsed()) return miniscope::cmd_analyze(config);
  if (explore->parsed()) return miniscope::cmd_explore(config);
  return miniscope::cmd_check(config);
}
