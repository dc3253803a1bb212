// npfb: solve, analyze, verify-barriers and sweep front end.

#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "npfb/commands.hpp"
#include "npfb/manifest.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Regularized normalized p-Laplacian free-boundary solver and analyzer", "npfb"};
  app.set_version_flag("--version", npfb::kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();

  npfb::CommandOptions opts;
  std::string config, out_dir, checks, branch, field, kappa, seed;
  bool quiet = false;

  app.add_option("--config", config, "Config file (sections [grid] [pde_core] ...)")->check(CLI::ExistingFile);
  auto* o_out = app.add_option("--out-dir", out_dir, "Output directory");
  auto* o_checks = app.add_option("--checks", checks, "Comma-separated checks, e.g. nondegeneracy,growth");
  auto* o_kappa = app.add_option("--kappa", kappa, "Positivity threshold factor: theta = kappa h^2")
                     ->check(CLI::PositiveNumber);
  auto* o_seed = app.add_option("--seed", seed, "Seed for sampled estimates")->check(CLI::NonNegativeNumber);
  auto* o_branch = app.add_option("--branch-normalization", branch, "consistent or paper-literal")
                       ->check(CLI::IsMember({"consistent", "paper-literal"}));
  app.add_flag("-q,--quiet", quiet, "No progress output");

  auto* solve = app.add_subcommand("solve", "Run the eps/delta continuation and dump fields");
  auto* analyze = app.add_subcommand("analyze", "Run free-boundary checks on a field dump");
  analyze->add_option("--field", field, "Field dump written by solve")->required();
  auto* verify = app.add_subcommand("verify-barriers", "Residual table for the explicit barriers");
  verify->add_flag("--mutate-omega", opts.mutate_omega, "Plant a wrong A2 in omega (self-test)");
  auto* sweep = app.add_subcommand("sweep", "Cartesian product over p, eps and h with checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? npfb::kExitOk : npfb::kExitConfig;
  }

  if (!config.empty()) opts.config_path = config;
  if (*o_out) opts.overrides["cli.out_dir"] = out_dir;
  if (*o_kappa) opts.overrides["fb_analysis.kappa"] = kappa;
  if (*o_seed) opts.overrides["cli.seed"] = seed;
  if (*o_branch) opts.overrides["pde_core.branch-normalization"] = branch;
  if (*o_checks) {
    std::stringstream ss(checks);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) opts.checks.push_back(item);
  }
  if (!field.empty()) opts.field_path = field;
  if (!quiet) opts.log = &std::cout;

  if (*solve) return npfb::cmd_solve(opts);
  if (*analyze) return npfb::cmd_analyze(opts);
  if (*verify) return npfb::cmd_verify_barriers(opts);
  if (*sweep) return npfb::cmd_sweep(opts);
  return npfb::kExitConfig;
}
