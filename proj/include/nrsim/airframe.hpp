// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nrsim/scenario.hpp"
#include "nrsim/timebase.hpp"

namespace nrsim {

enum class SuPurpose { pucch, processing, pdcch, data, guard };

const char* to_string(SuPurpose p);

/// Time/frequency discretization of one run.  Timeline structure, in SUs:
/// activation slots of `window_su` data SUs followed by a 2-SU guard
/// interval tile the axis; each inter-PUCCH cycle spans `n_on` slots and
/// opens with PUCCH / processing / PDCCH on its first three SUs.
struct FrameParams {
  double symbol_duration_s = 0.0;
  int symbols_per_su = kSymbolsPerSu;  // n_os
  double su_duration_s = 0.0;
  int n_rb = 0;
  int rbs_pucch = 1;
  int rbs_pdcch = 1;
  int rbs_harq = 1;
  int pusch_data_symbols = 4;
  int switch_symbols = 1;

  std::int64_t window_su = 0;  // tau_on in SUs
  std::int64_t period_su = 0;  // window + guard interval
  int n_on = 0;
  std::int64_t cycle_su = 0;   // period * n_on
  std::int64_t guard_su = 2;

  static FrameParams from_config(const ScenarioConfig& cfg);

  SuPurpose purpose(std::int64_t su) const;
  std::int64_t slot_of_su(std::int64_t su) const { return su / period_su; }
  std::int64_t cycle_of_su(std::int64_t su) const { return su / cycle_su; }
  std::int64_t slot_start_su(std::int64_t slot) const { return slot * period_su; }
  /// RBs grantable to PUSCH in this SU (0 on control SUs).
  int capacity_rbs(std::int64_t su) const;
};

/// Eq-style inter-PUCCH time: (tau_on + 2 SU) * n_on, evaluated on the SU
/// lattice so reference points (41.25 / 33 / 66 ms) come out bit-exact.
double compute_t_ip(double tau_on_s, int n_on, const FrameParams& frame);

/// ceil(8*pdu_bytes / (12 * pusch_data_symbols * bits_per_symbol)); coding
/// rate fixed at 1 (kCodingRate) so modulation alone differentiates links.
int rbs_needed(int pdu_bytes, int modulation_bits_per_symbol, const FrameParams& frame);

inline constexpr double kCodingRate = 1.0;

/// Purpose labels for the SUs of one full cycle (skeleton grid).
std::vector<SuPurpose> layout_control_plane(const FrameParams& frame);

/// Per-SU occupancy record for debug dumps.
struct GridSlice {
  std::int64_t su = 0;
  int ue_id = -1;
  std::int64_t block_id = -1;
  int rb_start = 0;
  int rb_count = 0;
};

struct ResourceGrid {
  std::vector<GridSlice> slices;  // chronological
  std::string dump(const FrameParams& frame) const;
};

}  // namespace nrsim
