// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nrsim {

enum class SchedulerKind { bsps, ssps, asps };

const char* to_string(SchedulerKind k);
SchedulerKind scheduler_kind_from_string(const std::string& s);

/// Factory layout bound to a 5G-ACIA use case.
struct UseCasePreset {
  std::string name;
  int n_lines = 0;
  int machines_per_line = 0;
  double floor_length_m = 0.0;
  double floor_width_m = 0.0;
  double floor_height_m = 0.0;
  double inter_machine_distance_m = 0.0;
  double machine_side_m = 0.0;
};

const std::vector<UseCasePreset>& use_case_presets();
const UseCasePreset* find_preset(const std::string& name);

struct ScenarioConfig {
  // Radio
  double carrier_frequency_hz = 3.5e9;
  double bandwidth_hz = 60e6;          // {60e6, 120e6}
  double subcarrier_spacing_hz = 60e3; // only 60 kHz supported
  double snr_threshold_db = -5.0;
  double noise_temperature_k = 290.0;

  // Fixed latency components (symbol counts where the budget is symbol-based)
  int t_p_symbols = 7;
  int t_tx_symbols = 4;
  double tau_p_s = 0.0;
  double t_fh_s = 0.05e-3;
  double tau_fh_s = 0.0;
  int t_gnb_symbols = 7;
  double t_cn_s = 0.1e-3;

  double sim_time_s = 10.0;

  // Link budget
  double antenna_gain_ue_db = 0.0;
  double antenna_gain_gnb_db = 0.0;
  double tx_power_ul_dbm = 23.0;
  double tx_power_dl_dbm = 30.0;

  // Deployment
  double inter_machine_distance_m = 5.0;
  double machine_side_m = 2.0;
  int min_machines = 16;
  double floor_length_m = 20.0;
  double floor_width_m = 20.0;
  double floor_height_m = 4.0;

  // Protocol / scheduling
  int header_bytes = 72;
  double bucket_fraction = 0.4;
  double ue_activation_prob = 1.0;

  int n_lines = 4;
  int machines_per_line = 4;
  int num_ues = 60;
  double tau_on_s = 8e-3;  // snapped to whole SUs at load
  int n_on = 5;
  SchedulerKind scheduler_kind = SchedulerKind::ssps;
  bool dropping_enabled = false;

  // Traffic
  double traffic_mix = 0.0;  // fraction of aperiodic UEs
  double periodic_period_s = 2e-3;
  double aperiodic_tmin_s = 2e-3;
  double aperiodic_tmax_s = 6e-3;
  double offered_traffic_bps = 2.75e6;

  // Modulation decision thresholds (lower bound is snr_threshold_db)
  double mod_threshold_qam16_db = 10.0;
  double mod_threshold_qam64_db = 20.0;

  std::uint64_t rng_seed = 1;

  std::optional<std::string> preset_name;

  // Conflict-resolution report produced while loading; not part of the value.
  std::vector<std::string> resolution_notes;

  bool operator==(const ScenarioConfig& o) const;
};

/// Payload bytes per data block: ceil(G * tau / 8).  Aperiodic UEs reuse the
/// periodic reference period so the offered-traffic axis means the same thing
/// for both kinds.
int derive_block_size_bytes(const ScenarioConfig& cfg);

/// Key/value overrides applied after preset resolution (e.g. CLI --set).
using ConfigOverrides = std::vector<std::pair<std::string, std::string>>;

ScenarioConfig load_config_text(const std::string& text, const std::string& source_name,
                                const ConfigOverrides& overrides = {});
ScenarioConfig load_config_file(const std::string& path, const ConfigOverrides& overrides = {});

/// Applies one key=value assignment (same parser as the file loader).
void apply_config_key(ScenarioConfig& cfg, const std::string& key, const std::string& value,
                      const std::string& context);

void validate(const ScenarioConfig& cfg);

/// Emits a flat key=value document; load_config_text(emit_config(c)) == c.
std::string emit_config(const ScenarioConfig& cfg);

}  // namespace nrsim
