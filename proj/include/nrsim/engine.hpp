// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nrsim/scheduler.hpp"

namespace nrsim {

/// Per-delivered-block latency decomposition; total is the exact sum of the
/// components.
struct LatencyRecord {
  std::int64_t block_id = -1;
  int ue_id = -1;
  double t_p_s = 0.0;
  double t_ran_s = 0.0;
  double t_tx_s = 0.0;
  double tau_p_s = 0.0;
  double t_fh_s = 0.0;
  double tau_fh_s = 0.0;
  double t_gnb_s = 0.0;
  double t_cn_s = 0.0;
  double total_s = 0.0;
};

/// Sum of the constant terms of the latency decomposition (the floor every
/// delivered block satisfies).
double latency_floor_s(const ScenarioConfig& cfg);

/// Builds the record for a block whose transmission completed in the SU
/// starting at `completion_su`.
LatencyRecord compute_latency(const DataBlock& block, std::int64_t completion_su,
                              const ScenarioConfig& cfg);

struct RunMetrics {
  std::int64_t generated = 0;
  std::int64_t delivered = 0;
  std::int64_t dropped = 0;
  std::int64_t still_queued = 0;  // excluded from both the mean and the loss ratio
  double loss_ratio = 0.0;
  double mean_e2e_s = 0.0;       // per-UE means averaged across UEs; NaN when no deliveries
  double flat_mean_e2e_s = 0.0;  // plain per-block mean, for comparison
  double p99_e2e_s = 0.0;
  double min_e2e_s = 0.0;
  double max_e2e_s = 0.0;
  std::vector<double> per_ue_mean_s;          // NaN where a UE delivered nothing
  std::vector<std::int64_t> per_ue_delivered;
  std::uint64_t seed = 0;

  bool has_latency() const { return delivered > 0; }
};

/// Two-stage aggregation (per UE, then across UEs) plus the flat mean.
RunMetrics aggregate(const std::vector<LatencyRecord>& records, std::int64_t dropped,
                     std::int64_t still_queued, int num_ues);

struct RunOptions {
  bool keep_records = false;
  bool keep_grant_log = false;
  bool keep_grid = false;
  bool keep_cycle_slices = false;  // per-cycle grant slices, for equivalence checks
  /// Override for the indoor-factory coefficients (defaults to the built-in
  /// transcription).
  std::optional<InfConstants> inf_constants;
};

struct RunResult {
  RunMetrics metrics;
  std::vector<LatencyRecord> records;     // when keep_records
  std::string grant_log_csv;              // when keep_grant_log
  ResourceGrid grid;                      // when keep_grid
  std::string topology_dump;
  std::string arrivals_csv;
  /// Grant slices per cycle (populated when keep_cycle_slices is set).
  std::vector<std::vector<GrantSlice>> cycle_slices;
  std::optional<AspsEstimatorState> estimator_final;
};

RunResult run_simulation(const ScenarioConfig& cfg, const RunOptions& opts = {});

/// Convenience wrapper returning only the aggregates.
RunMetrics run(const ScenarioConfig& cfg);

std::string serialize_metrics(const RunMetrics& m, const ScenarioConfig& cfg);
std::string metrics_to_json(const RunMetrics& m, const ScenarioConfig& cfg);

}  // namespace nrsim
