// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nrsim/airframe.hpp"
#include "nrsim/channel.hpp"
#include "nrsim/deployment.hpp"
#include "nrsim/rng.hpp"

namespace nrsim {

enum class BlockState { queued, granted, transmitted, dropped };

/// One PHY-layer PDU.  Raw generation time feeds latency accounting; the
/// snapped symbol index feeds grid math.
struct DataBlock {
  std::int64_t id = -1;
  int ue_id = -1;
  double gen_raw_s = 0.0;
  std::int64_t gen_sym = 0;    // next symbol boundary at/after gen_raw_s
  std::int64_t ready_sym = 0;  // gen_sym + T_P
  int payload_bytes = 0;
  int pdu_bytes = 0;
  int rbs_required = 0;
  std::int64_t slot_index = -1;
  std::int64_t deadline_sym = 0;  // slot end + guard interval
  BlockState state = BlockState::queued;
  int remaining_rbs = 0;  // partial-grant credit carries across SUs
};

/// One machine activation per line; slot j activates index (j mod
/// machines_per_line) in every line.
struct ActivationSchedule {
  std::int64_t n_slots = 0;
  std::int64_t period_su = 0;
  std::int64_t window_su = 0;
  int machines_per_line = 0;

  std::int64_t slot_start_su(std::int64_t slot) const { return slot * period_su; }
  std::int64_t slot_window_end_su(std::int64_t slot) const {
    return slot * period_su + window_su;
  }
  std::int64_t slot_deadline_sym(std::int64_t slot) const {
    return (slot + 1) * period_su * kSymbolsPerSu;  // window + 2 guard SUs
  }
  int active_index(std::int64_t slot) const {
    return static_cast<int>(slot % machines_per_line);
  }
};

ActivationSchedule build_activation_schedule(const ScenarioConfig& cfg, const FrameParams& frame);

/// Active UE ids for one slot (machine active in that slot and a successful
/// p-draw); draw streams are per UE.
std::vector<int> activate_ues(const ActivationSchedule& schedule, std::int64_t slot,
                              const Topology& topo, double p, std::uint64_t master_seed);

/// Periodic in-slot generation offsets: k*tau strictly inside [0, window).
std::vector<std::int64_t> gen_periodic_offsets_sym(std::int64_t window_sym, std::int64_t tau_sym);

/// Aperiodic offsets (seconds): first ~ U[t_min, (t_min+t_max)/2]; second =
/// first + U[t_min, t_max] if it still falls inside the activation window.
std::pair<double, std::optional<double>> gen_aperiodic_offsets(double t_min_s, double t_max_s,
                                                               double tau_on_s, Rng& rng);

struct Timeline {
  std::vector<DataBlock> blocks;                // sorted by (gen_sym, ue)
  std::vector<std::vector<char>> slot_active;   // slot -> per-ue activation flag
  std::int64_t lost_at_generation = 0;          // inadequate-link traffic
};

Timeline build_timeline(const ScenarioConfig& cfg, const Topology& topo,
                        const std::vector<LinkState>& links, const ActivationSchedule& schedule,
                        const FrameParams& frame);

/// Arrival-trace export: one line per block (ue_id, time, bytes).
std::string dump_arrivals(const Timeline& tl);

}  // namespace nrsim
