#include "atep/cli/commands.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "atep/config/run_config.hpp"
#include "atep/engine/engine.hpp"
#include "atep/errors.hpp"
#include "atep/io_format.hpp"
#include "atep/metrics/checkpoint.hpp"
#include "atep/metrics/generalization.hpp"
#include "atep/metrics/ledger.hpp"

namespace atep::cli {

namespace fs = std::filesystem;

fs::path default_run_root() {
  if (const char* root = std::getenv("ATEP_RUN_ROOT"); root && *root) return root;
  return "runs";
}

const std::vector<std::string>& export_names() {
  static const std::vector<std::string> names{"annecs", "fnr", "anr", "nodes", "func_evals", "terrain", "actions"};
  return names;
}

namespace {

std::string config_echo(const config::RunConfig& cfg) {
  return "# atep " ATEP_VERSION " resolved configuration\n" + config::render_config(cfg);
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

fs::path resolve_run_dir(const fs::path& arg, const Context& ctx) {
  if (fs::exists(arg) || arg.is_absolute()) return arg;
  return ctx.run_root / arg;
}

// Step until `target`, appending to the run directory's ledger files and
// checkpointing on schedule and at the end.
void run_loop(const fs::path& run_dir, const config::RunConfig& cfg, engine::EngineState& state, int target,
              Context& ctx) {
  std::ofstream ledger(run_dir / "ledger.tsv", std::ios::app);
  std::ofstream transfers(run_dir / "transfers.tsv", std::ios::app);
  bool saved = false;
  while (state.iteration < target) {
    const std::size_t events_before = state.transfers.size();
    engine::step_iteration(state);
    const auto& row = state.ledger.back();
    ledger << metrics::format_row(row) << '\n' << std::flush;
    for (std::size_t i = events_before; i < state.transfers.size(); ++i)
      transfers << metrics::format_transfer(state.transfers[i]) << '\n';
    transfers.flush();
    saved = false;
    if (cfg.checkpoint_every_iters > 0 && state.iteration % cfg.checkpoint_every_iters == 0) {
      metrics::save_checkpoint(run_dir / "checkpoint", cfg, state);
      saved = true;
    }
    if (row.iteration % 10 == 0 || row.iteration == target)
      ctx.out << "iteration " << row.iteration << " annecs " << row.annecs << " pairs " << row.active_pair_count
              << " best " << format_double(row.mean_best_fitness) << " evals " << row.cumulative_function_evals
              << '\n';
  }
  if (!saved) metrics::save_checkpoint(run_dir / "checkpoint", cfg, state);
}

template <typename Fn>
int guarded(Context& ctx, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    ctx.err << "config error: " << e.what() << '\n';
  } catch (const CheckpointError& e) {
    ctx.err << "checkpoint error: " << e.what() << '\n';
  } catch (const ShortfallError& e) {
    ctx.err << "generalization error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    ctx.err << "error: " << e.what() << '\n';
  }
  return 1;
}

}  // namespace

int cmd_run(const std::string& config_path, bool overwrite, Context& ctx) {
  return guarded(ctx, [&] {
    const auto cfg = config::load_config_file(config_path);
    const fs::path run_dir = ctx.run_root / cfg.name;
    if (fs::exists(run_dir) && !fs::is_empty(run_dir)) {
      if (!overwrite) {
        ctx.err << "error: run directory " << run_dir.string()
                << " already exists (use resume, or --overwrite to start over)\n";
        return 1;
      }
      fs::remove_all(run_dir);
    }
    fs::create_directories(run_dir);
    write_text(run_dir / "config.txt", config_echo(cfg));
    write_text(run_dir / "ledger.tsv", std::string(metrics::ledger_header()) + "\n");
    write_text(run_dir / "transfers.tsv", std::string(metrics::transfers_header()) + "\n");

    auto state = engine::make_initial_state(cfg.engine);
    run_loop(run_dir, cfg, state, cfg.iterations, ctx);
    ctx.out << "run complete: " << run_dir.string() << '\n';
    return 0;
  });
}

int cmd_resume(const fs::path& run_dir_arg, std::optional<int> extra, bool allow_config_change, Context& ctx) {
  return guarded(ctx, [&] {
    const fs::path run_dir = resolve_run_dir(run_dir_arg, ctx);
    auto cp = metrics::load_checkpoint(run_dir / "checkpoint");
    const auto echoed = config::load_config_file((run_dir / "config.txt").string());
    const auto saved_hash = config::text_hash(config::render_config(cp.config));
    const auto echo_hash = config::text_hash(config::render_config(echoed));
    if (saved_hash != echo_hash) {
      if (!allow_config_change) {
        ctx.err << "error: " << (run_dir / "config.txt").string() << " (hash " << echo_hash
                << ") differs from the checkpoint configuration (hash " << saved_hash
                << "); pass --allow-config-change to continue with the edited configuration\n";
        return 1;
      }
      cp.config = echoed;
      cp.state.config = echoed.engine;
    }
    if (extra && *extra < 0) throw std::invalid_argument("extra iterations must be >= 0");
    const int target = extra ? cp.state.iteration + *extra : cp.config.iterations;
    if (target <= cp.state.iteration) {
      ctx.out << "nothing to do: checkpoint is at iteration " << cp.state.iteration << '\n';
      return 0;
    }

    // Drop anything written after the checkpoint so the files match the state.
    std::ostringstream ledger, transfers;
    metrics::write_ledger(ledger, cp.state.ledger);
    metrics::write_transfers(transfers, cp.state.transfers);
    write_text(run_dir / "ledger.tsv", ledger.str());
    write_text(run_dir / "transfers.tsv", transfers.str());
    write_text(run_dir / "config.txt", config_echo(cp.config));

    run_loop(run_dir, cp.config, cp.state, target, ctx);
    ctx.out << "resumed run complete at iteration " << cp.state.iteration << '\n';
    return 0;
  });
}

int cmd_eval_generalization(const std::vector<fs::path>& run_dirs, const GeneralizationOptions& opts,
                            Context& ctx) {
  return guarded(ctx, [&] {
    if (run_dirs.empty()) throw std::invalid_argument("at least one run directory is required");
    std::vector<metrics::MethodRun> methods;
    metrics::GeneralizationConfig gcfg;
    std::map<std::string, int> names;
    for (std::size_t i = 0; i < run_dirs.size(); ++i) {
      const fs::path dir = resolve_run_dir(run_dirs[i], ctx);
      const auto cp = metrics::load_checkpoint(dir / "checkpoint");
      if (i == 0) {
        gcfg.sim = cp.config.engine.sim;
        gcfg.terrain = cp.config.engine.terrain;
      }
      std::string name = cp.config.name;
      if (names[name]++) name += "#" + std::to_string(names[name]);
      methods.push_back({name, metrics::solved_environments(cp.state)});
    }
    gcfg.n_envs = opts.n_envs;
    gcfg.n_runs = opts.n_runs;
    gcfg.noise_std = opts.noise_std;
    gcfg.noise_seed = opts.noise_seed;
    gcfg.workers = opts.workers;
    const auto report = metrics::run_generalization(methods, gcfg);

    const fs::path out_dir = opts.out_dir.empty() ? ctx.run_root / "generalization" : opts.out_dir;
    fs::create_directories(out_dir);
    std::ofstream table(out_dir / "generalization.tsv", std::ios::trunc);
    metrics::write_report_table(table, report);
    std::ofstream summary(out_dir / "generalization_summary.json", std::ios::trunc);
    metrics::write_report_summary(summary, report);
    if (!table || !summary) throw std::runtime_error("cannot write report files in " + out_dir.string());

    ctx.out << (report.self_variant ? "self" : "cross") << "-generalization, " << report.n_runs
            << " runs per pair\n";
    for (const auto& s : report.summaries)
      ctx.out << s.method << ": pairs " << s.total << " above_300 " << format_double(s.percent[0])
              << "% between_200_300 " << format_double(s.percent[1]) << "% below_200 "
              << format_double(s.percent[2]) << "%\n";
    ctx.out << "report written to " << out_dir.string() << '\n';
    return 0;
  });
}

int cmd_export(const fs::path& run_dir_arg, const std::string& what, std::optional<int> env_id,
               const fs::path& out_file, Context& ctx) {
  return guarded(ctx, [&] {
    const auto& names = export_names();
    if (std::find(names.begin(), names.end(), what) == names.end()) {
      std::string valid;
      for (const auto& n : names) valid += (valid.empty() ? "" : ", ") + n;
      ctx.err << "error: unknown series '" << what << "' (valid: " << valid << ")\n";
      return 1;
    }
    const fs::path run_dir = resolve_run_dir(run_dir_arg, ctx);
    std::ostringstream out;

    if (what == "terrain" || what == "actions") {
      const auto cp = metrics::load_checkpoint(run_dir / "checkpoint");
      const auto& s = cp.state;
      if (what == "terrain") {
        if (!env_id) throw std::invalid_argument("export terrain needs --env-id");
        const terrain::EnvGenome* env = nullptr;
        for (const auto& p : s.active)
          if (p.env.env_id == *env_id) env = &p.env;
        for (const auto& a : s.archive)
          if (a.env.env_id == *env_id) env = &a.env;
        if (!env) throw std::invalid_argument("no environment with id " + std::to_string(*env_id));
        terrain::write_terrain_table(out, terrain::synthesize(*env, cp.config.engine.terrain));
      } else {
        out << "env_id\tagent_id\tdimension\tbin_lo\tbin_hi\tcount\n";
        for (const auto& p : s.active) {
          if (!p.champion || (env_id && p.env.env_id != *env_id)) continue;
          const auto r = sim::rollout(phenotype::compile(*p.champion), p.terrain, cp.config.engine.sim);
          const auto& h = r.action_histogram;
          for (std::size_t d = 0; d < h.counts.size(); ++d)
            for (int b = 0; b < h.bins; ++b)
              out << p.env.env_id << '\t' << p.champion->id << '\t' << d << '\t' << format_double(h.bin_lo(b))
                  << '\t' << format_double(h.bin_hi(b)) << '\t' << h.counts[d][static_cast<std::size_t>(b)] << '\n';
        }
      }
    } else {
      std::ifstream in(run_dir / "ledger.tsv");
      if (!in) throw std::runtime_error("no ledger at " + (run_dir / "ledger.tsv").string());
      const auto rows = metrics::read_ledger(in);
      out << "iteration\t" << what << '\n';
      int skipped = 0;
      for (const auto& r : rows) {
        std::optional<double> v;
        if (what == "annecs") v = r.annecs;
        else if (what == "nodes") v = r.mean_nodes;
        else if (what == "func_evals") v = static_cast<double>(r.cumulative_function_evals);
        else if (what == "fnr") v = metrics::fnr(r);
        else if (what == "anr") v = metrics::anr(r);
        if (!v) {
          ++skipped;
          continue;
        }
        out << r.iteration << '\t';
        if (what == "annecs") out << r.annecs;
        else if (what == "func_evals") out << r.cumulative_function_evals;
        else out << format_double(*v);
        out << '\n';
      }
      if (skipped > 0)
        ctx.err << "warning: skipped " << skipped << " rows with no hidden nodes (" << what << " undefined)\n";
    }

    if (out_file.empty()) {
      ctx.out << out.str();
    } else {
      write_text(out_file, out.str());
    }
    return 0;
  });
}

}  // namespace atep::cli
