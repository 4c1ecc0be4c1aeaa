// SPDX-License-Identifier: Apache-2.0

#include "nrsim/airframe.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "nrsim/error.hpp"

namespace nrsim {

const char* to_string(SuPurpose p) {
  switch (p) {
    case SuPurpose::pucch: return "PUCCH";
    case SuPurpose::processing: return "PROC";
    case SuPurpose::pdcch: return "PDCCH";
    case SuPurpose::data: return "DATA";
    case SuPurpose::guard: return "GUARD";
  }
  return "?";
}

FrameParams FrameParams::from_config(const ScenarioConfig& cfg) {
  FrameParams f;
  f.symbol_duration_s = nrsim::symbol_duration_s();
  f.su_duration_s = nrsim::su_duration_s();
  // 60 MHz -> 84 RBs, 120 MHz -> 167 RBs at 60 kHz spacing.
  f.n_rb = static_cast<int>(
      std::ceil(cfg.bandwidth_hz / (12.0 * cfg.subcarrier_spacing_hz) - 1e-9));
  f.window_su = s_to_su_round(cfg.tau_on_s);
  if (f.window_su < 1) f.window_su = 1;
  f.period_su = f.window_su + f.guard_su;
  f.n_on = cfg.n_on;
  f.cycle_su = f.period_su * cfg.n_on;
  return f;
}

SuPurpose FrameParams::purpose(std::int64_t su) const {
  const std::int64_t cycle_rel = su % cycle_su;
  if (cycle_rel == 0) return SuPurpose::pucch;
  if (cycle_rel == 1) return SuPurpose::processing;
  if (cycle_rel == 2) return SuPurpose::pdcch;
  const std::int64_t slot_rel = su % period_su;
  return slot_rel >= window_su ? SuPurpose::guard : SuPurpose::data;
}

int FrameParams::capacity_rbs(std::int64_t su) const {
  switch (purpose(su)) {
    case SuPurpose::pucch:
    case SuPurpose::processing:
    case SuPurpose::pdcch:
      return 0;  // whole SU reserved for the control pipeline
    case SuPurpose::data:
    case SuPurpose::guard:
      return n_rb - rbs_harq;
  }
  return 0;
}

double compute_t_ip(double tau_on_s, int n_on, const FrameParams& frame) {
  if (n_on < 1) throw ValidationError("n_on must be >= 1");
  if (!(tau_on_s > 0.0)) throw ValidationError("tau_on must be > 0");
  std::int64_t window_su = s_to_su_round(tau_on_s);
  if (window_su < 1) window_su = 1;
  const std::int64_t total_sym =
      (window_su + frame.guard_su) * static_cast<std::int64_t>(n_on) * frame.symbols_per_su;
  return sym_to_s(total_sym);
}

int rbs_needed(int pdu_bytes, int modulation_bits_per_symbol, const FrameParams& frame) {
  if (pdu_bytes < 1) throw ValidationError("pdu_bytes must be >= 1");
  if (modulation_bits_per_symbol < 1) throw ValidationError("modulation order must be >= 1");
  const double bits_per_rb =
      12.0 * frame.pusch_data_symbols * modulation_bits_per_symbol * kCodingRate;
  return static_cast<int>(std::ceil(8.0 * pdu_bytes / bits_per_rb - 1e-12));
}

std::vector<SuPurpose> layout_control_plane(const FrameParams& frame) {
  std::vector<SuPurpose> grid(static_cast<std::size_t>(frame.cycle_su));
  for (std::int64_t su = 0; su < frame.cycle_su; ++su) {
    grid[static_cast<std::size_t>(su)] = frame.purpose(su);
  }
  return grid;
}

std::string ResourceGrid::dump(const FrameParams& frame) const {
  std::ostringstream out;
  out << "su,purpose,ue,block,rb_start,rb_count\n";
  char buf[128];
  for (const auto& s : slices) {
    std::snprintf(buf, sizeof(buf), "%lld,%s,%d,%lld,%d,%d\n",
                  static_cast<long long>(s.su), to_string(frame.purpose(s.su)), s.ue_id,
                  static_cast<long long>(s.block_id), s.rb_start, s.rb_count);
    out << buf;
  }
  return out.str();
}

}  // namespace nrsim
