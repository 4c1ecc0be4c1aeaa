// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "nrsim/engine.hpp"

namespace nrsim {

/// Cartesian experiment grid over named config axes, replicated per point
/// with seeds base_seed + replica.
struct SweepSpec {
  ScenarioConfig base;
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;  // ordered
  int replicas = 5;
  std::uint64_t base_seed = 1;
  std::size_t max_points = 10000;
};

SweepSpec load_sweep_text(const std::string& text, const std::string& source,
                          const std::string& base_dir);
SweepSpec load_sweep_file(const std::string& path);

struct SweepRow {
  std::size_t point = 0;
  int replica = 0;
  ScenarioConfig cfg;
  RunMetrics metrics;
  bool failed = false;
  std::string error;
};

/// Runs every (point, replica) on a bounded worker pool; row order is
/// point-major, replica-minor regardless of the worker count.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, int jobs);

/// Stable column set shared by cmd_run and cmd_sweep outputs.
std::string sweep_csv_header();
std::string sweep_csv_row(const SweepRow& row);
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

/// Axis aliases accepted in sweep files (N, G, B, t_min, use_case, ...).
std::string canonical_axis_key(const std::string& key);

}  // namespace nrsim
