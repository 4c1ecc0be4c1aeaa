// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>

namespace nrsim {

// At 60 kHz subcarrier spacing with normal cyclic prefix a 0.25 ms slot
// carries 14 OFDM symbols, so one scheduling unit (SU) of 7 symbols lasts
// exactly 0.125 ms.  All grid arithmetic runs on integer symbol indices;
// seconds appear only at the accounting boundary through a single division
// of exact integers, which IEEE-754 rounds correctly and reproducibly.

inline constexpr int kSymbolsPerSu = 7;
inline constexpr int kSymbolsPerSlot = 14;
inline constexpr std::int64_t kSlotMicros = 250;

inline double sym_to_s(std::int64_t sym) {
  return static_cast<double>(sym * kSlotMicros) /
         (static_cast<double>(kSymbolsPerSlot) * 1e6);
}

inline double symbol_duration_s() { return sym_to_s(1); }
inline double su_duration_s() { return sym_to_s(kSymbolsPerSu); }

/// Smallest symbol index whose start time is >= t_s.
inline std::int64_t s_to_sym_ceil(double t_s) {
  auto sym = static_cast<std::int64_t>(
      std::ceil(t_s * (kSymbolsPerSlot * 1e6 / static_cast<double>(kSlotMicros)) - 1e-9));
  if (sym < 0) sym = 0;
  while (sym_to_s(sym) < t_s) ++sym;
  while (sym > 0 && sym_to_s(sym - 1) >= t_s) --sym;
  return sym;
}

/// Nearest whole number of SUs for a duration (used to snap tau_on).
inline std::int64_t s_to_su_round(double t_s) {
  return static_cast<std::int64_t>(std::llround(t_s / su_duration_s()));
}

inline std::int64_t su_start_sym(std::int64_t su) { return su * kSymbolsPerSu; }

}  // namespace nrsim
