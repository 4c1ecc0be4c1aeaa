// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "nrsim/engine.hpp"
#include "nrsim/error.hpp"
#include "nrsim/sweep.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

std::filesystem::path out_path(const std::string& explicit_out, const std::string& fallback) {
  if (!explicit_out.empty()) return explicit_out;
  std::filesystem::path dir = ".";
  if (const char* env = std::getenv("NRSIM_OUT_DIR")) dir = env;
  return dir / fallback;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw nrsim::ConfigError("cannot write " + path.string());
  f << content;
}

nrsim::ConfigOverrides parse_sets(const std::vector<std::string>& sets) {
  nrsim::ConfigOverrides overrides;
  for (const auto& s : sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos) throw nrsim::ConfigError("--set expects key=value, got " + s);
    overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return overrides;
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& sets,
            long long seed_override, const std::string& out, const std::string& json_out,
            const std::string& topo_out, const std::string& trace_out,
            const std::string& grants_out, const std::string& grid_out,
            const std::string& inf_constants_path, bool quiet) {
  nrsim::ConfigOverrides overrides = parse_sets(sets);
  nrsim::ScenarioConfig cfg = nrsim::load_config_file(config_path, overrides);
  if (seed_override >= 0) cfg.rng_seed = static_cast<std::uint64_t>(seed_override);
  for (const auto& note : cfg.resolution_notes) {
    std::cerr << "note: " << note << "\n";
  }

  nrsim::RunOptions opts;
  opts.keep_grant_log = !grants_out.empty();
  opts.keep_grid = !grid_out.empty();
  if (!inf_constants_path.empty()) {
    opts.inf_constants = nrsim::load_inf_constants_file(inf_constants_path);
  }
  nrsim::RunResult res = nrsim::run_simulation(cfg, opts);
  const nrsim::RunMetrics& m = res.metrics;

  write_file(out_path(out, "nrsim_result.txt"), nrsim::serialize_metrics(m, cfg));
  if (!json_out.empty()) write_file(json_out, nrsim::metrics_to_json(m, cfg));
  if (!topo_out.empty()) write_file(topo_out, res.topology_dump);
  if (!trace_out.empty()) write_file(trace_out, res.arrivals_csv);
  if (!grants_out.empty()) write_file(grants_out, res.grant_log_csv);
  if (!grid_out.empty()) {
    write_file(grid_out, res.grid.dump(nrsim::FrameParams::from_config(cfg)));
  }

  if (!quiet) {
    if (m.has_latency()) {
      std::printf("mean E2E latency: %.3f ms (flat %.3f ms), p99 %.3f ms\n", m.mean_e2e_s * 1e3,
                  m.flat_mean_e2e_s * 1e3, m.p99_e2e_s * 1e3);
    } else {
      std::printf("mean E2E latency: - (no delivered blocks)\n");
    }
    std::printf("loss ratio: %.4f (delivered %lld, dropped %lld, queued at end %lld)\n",
                m.loss_ratio, static_cast<long long>(m.delivered),
                static_cast<long long>(m.dropped), static_cast<long long>(m.still_queued));
  }
  return kExitOk;
}

int cmd_sweep(const std::string& spec_path, int jobs, const std::string& out) {
  nrsim::SweepSpec spec = nrsim::load_sweep_file(spec_path);
  auto rows = nrsim::run_sweep(spec, jobs);
  const auto path = out_path(out, "nrsim_sweep.csv");
  write_file(path, nrsim::sweep_to_csv(rows));
  std::size_t failures = 0;
  for (const auto& r : rows) {
    if (r.failed) ++failures;
  }
  std::printf("%zu rows -> %s (%zu failed)\n", rows.size(), path.string().c_str(), failures);
  return kExitOk;
}

int cmd_presets() {
  for (const auto& p : nrsim::use_case_presets()) {
    std::printf("%-28s n_lines=%d machines_per_line=%d floor=%gx%gx%g m D=%g S=%g\n",
                p.name.c_str(), p.n_lines, p.machines_per_line, p.floor_length_m, p.floor_width_m,
                p.floor_height_m, p.inter_machine_distance_m, p.machine_side_m);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nrsim - uplink semi-persistent scheduling simulator for 5G NR industrial IoT"};
  app.require_subcommand(1);

  std::string config_path, spec_path, out, json_out, topo_out, trace_out, grants_out, grid_out;
  std::string inf_constants_path;
  std::vector<std::string> sets;
  long long seed = -1;
  int jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;
  bool quiet = false;

  auto* run_cmd = app.add_subcommand("run", "run one scenario");
  run_cmd->add_option("config", config_path, "scenario file")->required();
  run_cmd->add_option("--seed", seed, "override rng_seed");
  run_cmd->add_option("--set", sets, "override key=value (repeatable)");
  run_cmd->add_option("--out", out, "results file (default $NRSIM_OUT_DIR/nrsim_result.txt)");
  run_cmd->add_option("--json", json_out, "also write JSON metrics");
  run_cmd->add_option("--dump-topology", topo_out, "write the sampled topology");
  run_cmd->add_option("--trace-arrivals", trace_out, "write the arrival trace CSV");
  run_cmd->add_option("--grant-log", grants_out, "write the per-grant log CSV");
  run_cmd->add_option("--grid-dump", grid_out, "write the per-SU occupancy CSV");
  run_cmd->add_option("--inf-constants", inf_constants_path,
                      "indoor-factory path-loss constants file (see data/inf_pathloss.txt)");
  run_cmd->add_flag("--quiet", quiet, "suppress the summary line");

  auto* sweep_cmd = app.add_subcommand("sweep", "run a parameter sweep");
  sweep_cmd->add_option("spec", spec_path, "sweep spec file")->required();
  sweep_cmd->add_option("--jobs", jobs, "worker threads");
  sweep_cmd->add_option("--out", out, "CSV path (default $NRSIM_OUT_DIR/nrsim_sweep.csv)");

  auto* presets_cmd = app.add_subcommand("presets", "list use-case presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (run_cmd->parsed()) {
      return cmd_run(config_path, sets, seed, out, json_out, topo_out, trace_out, grants_out,
                     grid_out, inf_constants_path, quiet);
    }
    if (sweep_cmd->parsed()) return cmd_sweep(spec_path, jobs, out);
    if (presets_cmd->parsed()) return cmd_presets();
  } catch (const nrsim::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const nrsim::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
