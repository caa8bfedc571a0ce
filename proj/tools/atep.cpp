#include <iostream>

#include "CLI11.hpp"
#include "atep/cli/commands.hpp"
#include "atep/config/run_config.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Open-ended co-evolution of NEAT walkers and CPPN terrains"};
  app.set_version_flag("--version", ATEP_VERSION);
  app.require_subcommand(1);
  std::string run_root;
  app.add_option("--run-root", run_root, "Directory holding run directories (default $ATEP_RUN_ROOT or ./runs)");

  std::string config_path;
  bool overwrite = false;
  auto* run = app.add_subcommand("run", "Start a run from a config file");
  run->add_option("config", config_path, "Config file (key = value)")->required()->check(CLI::ExistingFile);
  run->add_flag("--overwrite", overwrite, "Replace an existing run directory of the same name");

  std::string resume_dir;
  std::optional<int> extra;
  bool allow_config_change = false;
  auto* resume = app.add_subcommand("resume", "Continue a run from its last checkpoint");
  resume->add_option("run_dir", resume_dir, "Run directory (absolute, relative, or a name under the run root)")
      ->required();
  resume->add_option("--extra", extra, "Iterations past the checkpoint (default: up to run.iterations)");
  resume->add_flag("--allow-config-change", allow_config_change,
                   "Continue even though config.txt was edited since the checkpoint");

  std::vector<std::string> gen_dirs;
  atep::cli::GeneralizationOptions gen;
  std::string gen_out;
  auto* evalgen = app.add_subcommand("eval-generalization", "Cross-evaluate solvers of completed runs");
  evalgen->add_option("run_dirs", gen_dirs, "One run (self variant) or several runs (cross variant)")->required();
  evalgen->add_option("--n-envs", gen.n_envs, "Latest solved environments per run")->capture_default_str();
  evalgen->add_option("--n-runs", gen.n_runs, "Rollouts per agent-environment pair")->capture_default_str();
  evalgen->add_option("--noise", gen.noise_std, "Observation noise stdev (0 disables)")->capture_default_str();
  evalgen->add_option("--noise-seed", gen.noise_seed, "Seed for the per-run noise streams")->capture_default_str();
  evalgen->add_option("--workers", gen.workers, "Rollout threads")->capture_default_str();
  evalgen->add_option("--out", gen_out, "Report directory (default <run root>/generalization)");

  std::string export_dir, what, export_out;
  std::optional<int> env_id;
  auto* exp = app.add_subcommand("export", "Write a plot-ready table from a run");
  exp->add_option("run_dir", export_dir, "Run directory")->required();
  exp->add_option("what", what, "annecs, fnr, anr, nodes, func_evals, terrain or actions")->required();
  exp->add_option("--env-id", env_id, "Environment for terrain (required) or actions (optional filter)");
  exp->add_option("--out", export_out, "Output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  atep::cli::Context ctx{std::cout, std::cerr};
  if (!run_root.empty()) ctx.run_root = run_root;

  if (*run) return atep::cli::cmd_run(config_path, overwrite, ctx);
  if (*resume) return atep::cli::cmd_resume(resume_dir, extra, allow_config_change, ctx);
  if (*evalgen) {
    gen.out_dir = gen_out;
    std::vector<fs::path> dirs(gen_dirs.begin(), gen_dirs.end());
    return atep::cli::cmd_eval_generalization(dirs, gen, ctx);
  }
  if (*exp) return atep::cli::cmd_export(export_dir, what, env_id, export_out, ctx);
  return 1;
}
