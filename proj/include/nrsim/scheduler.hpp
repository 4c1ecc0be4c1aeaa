// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <vector>

#include "nrsim/airframe.hpp"
#include "nrsim/channel.hpp"
#include "nrsim/traffic.hpp"

namespace nrsim {

/// Emitted only by UEs active at the PUCCH SU of the cycle.
struct SchedulingRequest {
  int ue_id = -1;
  std::vector<std::int64_t> queued_block_ids;
};

/// One pre-allocation entry: either a concrete queued block or a predicted
/// generation.  `tag_sym` is the (possibly fractional) symbol time of the
/// generation it stands for and drives EDF ordering; `guard_slot` is the
/// activation slot that may finish it inside a guard interval.
struct Demand {
  int ue_id = -1;
  std::int64_t intended_block = -1;  // -1 for predicted generations
  double tag_sym = 0.0;
  double deadline_sym = 0.0;  // remaining-RAN-budget deadline for EDF
  std::int64_t earliest_su = 0;
  std::int64_t guard_slot = -1;
  int rbs_total = 0;
  int remaining = 0;
  int seq = 0;  // creation order, last tie-breaker
};

/// RBs granted to one demand within one SU (contiguous range).
struct GrantSlice {
  std::int64_t su = 0;
  int ue_id = -1;
  std::int64_t intended_block = -1;
  int rb_start = 0;
  int rb_count = 0;
  std::int64_t guard_slot = -1;
  int demand_seq = 0;
};

/// Two-pass earliest-deadline-first allocation with a fair-first bucket:
/// pass 1 serves every eligible demand up to ceil(bucket_fraction * need),
/// pass 2 tops up residual capacity in the same order.  Partial service
/// rolls forward; a demand finishes in the SU where its cumulative grant
/// reaches its requirement.
std::vector<GrantSlice> allocate_edf_ff(std::vector<Demand>& demands, const FrameParams& frame,
                                        std::int64_t su_begin, std::int64_t su_end,
                                        double bucket_fraction);

struct CycleInfo {
  std::int64_t index = 0;
  std::int64_t start_su = 0;
  std::int64_t end_su = 0;  // exclusive
};

/// Read-only simulation state handed to the policies.
struct SimView {
  const ScenarioConfig* cfg = nullptr;
  const FrameParams* frame = nullptr;
  const Topology* topo = nullptr;
  const std::vector<LinkState>* links = nullptr;
  const ActivationSchedule* schedule = nullptr;
  const std::vector<DataBlock>* blocks = nullptr;
};

/// SU-level outcome of one finished cycle, relative to its start.
/// su_tx: SUs where at least one grant carried data; su_notx: SUs where at
/// least one grant went unused.
struct CycleObservation {
  std::int64_t cycle_index = -1;
  std::vector<std::int64_t> su_tx_rel;
  std::vector<std::int64_t> su_notx_rel;
};

/// Adaptive estimator state.  `tau_on_hat_sym` carries the raw quantity the
/// update rules operate on: the estimated slot repetition period (activation
/// window plus guard interval), initialized to T_IP / n_lines.  The
/// estimated generation window is derived from it.
struct AspsEstimatorState {
  int n_e = 0;
  double tau_on_hat_sym = 0.0;
  int n_on_hat = 1;
  std::optional<bool> parity_even;
  std::vector<std::int64_t> su_notx;  // last finished cycle, cycle-relative SUs
  std::vector<std::int64_t> su_tx;
  bool trained = false;

  double tau_on_hat_s() const { return tau_on_hat_sym * symbol_duration_s(); }
  double window_hat_sym() const {
    double w = tau_on_hat_sym - 2.0 * kSymbolsPerSu;
    return w < kSymbolsPerSu ? kSymbolsPerSu : w;
  }
  double window_hat_s() const { return window_hat_sym() * symbol_duration_s(); }
};

class SchedulerPolicy {
public:
  virtual ~SchedulerPolicy() = default;
  virtual std::vector<Demand> plan_cycle(const SimView& view, const CycleInfo& cycle,
                                         const std::vector<SchedulingRequest>& requests) = 0;
  virtual void observe_cycle(const CycleObservation&) {}
  virtual const AspsEstimatorState* estimator() const { return nullptr; }
};

std::unique_ptr<SchedulerPolicy> make_policy(SchedulerKind kind);

/// Pops every queued block whose activation period (guard interval included)
/// ended before `now_sym`; returns the dropped ids.  No-op when disabled.
std::vector<std::int64_t> apply_dropping(std::vector<std::deque<std::int64_t>>& queues,
                                         std::vector<DataBlock>& blocks, std::int64_t now_sym,
                                         bool enabled);

}  // namespace nrsim
