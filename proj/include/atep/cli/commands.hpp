#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace atep::cli {

/// Where run directories live: $ATEP_RUN_ROOT if set, else ./runs.
std::filesystem::path default_run_root();

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::filesystem::path run_root = default_run_root();
};

/// Series names accepted by cmd_export.
const std::vector<std::string>& export_names();

// Each command returns the process exit status: 0 on success, 1 when the
// operation failed (the diagnostic goes to ctx.err).

int cmd_run(const std::string& config_path, bool overwrite, Context& ctx);

/// `extra` iterations past the checkpoint; without it, up to run.iterations.
int cmd_resume(const std::filesystem::path& run_dir, std::optional<int> extra, bool allow_config_change,
               Context& ctx);

struct GeneralizationOptions {
  int n_envs = 20;
  int n_runs = 30;
  double noise_std = 0.01;
  std::uint64_t noise_seed = 0;
  int workers = 1;
  std::filesystem::path out_dir;  // empty: <run_root>/generalization
};

int cmd_eval_generalization(const std::vector<std::filesystem::path>& run_dirs,
                            const GeneralizationOptions& opts, Context& ctx);

/// Writes the table to `out_file`, or to ctx.out when empty.
int cmd_export(const std::filesystem::path& run_dir, const std::string& what, std::optional<int> env_id,
               const std::filesystem::path& out_file, Context& ctx);

}  // namespace atep::cli
