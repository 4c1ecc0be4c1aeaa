// SPDX-License-Identifier: Apache-2.0

#include "nrsim/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nrsim/error.hpp"
#include "nrsim/timebase.hpp"

namespace nrsim {

const char* to_string(SchedulerKind k) {
  switch (k) {
    case SchedulerKind::bsps: return "bsps";
    case SchedulerKind::ssps: return "ssps";
    case SchedulerKind::asps: return "asps";
  }
  return "?";
}

SchedulerKind scheduler_kind_from_string(const std::string& s) {
  std::string t;
  for (char c : s) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (t == "bsps") return SchedulerKind::bsps;
  if (t == "ssps") return SchedulerKind::ssps;
  if (t == "asps") return SchedulerKind::asps;
  throw ConfigError("unknown scheduler_kind '" + s + "' (expected bsps|ssps|asps)");
}

const std::vector<UseCasePreset>& use_case_presets() {
  static const std::vector<UseCasePreset> presets = {
      {"augmented_reality", 4, 4, 20.0, 20.0, 4.0, 5.0, 2.0},
      {"remote_access_maintenance", 2, 8, 50.0, 10.0, 10.0, 10.0, 3.0},
  };
  return presets;
}

const UseCasePreset* find_preset(const std::string& name) {
  for (const auto& p : use_case_presets()) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

bool ScenarioConfig::operator==(const ScenarioConfig& o) const {
  return carrier_frequency_hz == o.carrier_frequency_hz && bandwidth_hz == o.bandwidth_hz &&
         subcarrier_spacing_hz == o.subcarrier_spacing_hz &&
         snr_threshold_db == o.snr_threshold_db && noise_temperature_k == o.noise_temperature_k &&
         t_p_symbols == o.t_p_symbols && t_tx_symbols == o.t_tx_symbols && tau_p_s == o.tau_p_s &&
         t_fh_s == o.t_fh_s && tau_fh_s == o.tau_fh_s && t_gnb_symbols == o.t_gnb_symbols &&
         t_cn_s == o.t_cn_s && sim_time_s == o.sim_time_s &&
         antenna_gain_ue_db == o.antenna_gain_ue_db &&
         antenna_gain_gnb_db == o.antenna_gain_gnb_db && tx_power_ul_dbm == o.tx_power_ul_dbm &&
         tx_power_dl_dbm == o.tx_power_dl_dbm &&
         inter_machine_distance_m == o.inter_machine_distance_m &&
         machine_side_m == o.machine_side_m && min_machines == o.min_machines &&
         floor_length_m == o.floor_length_m && floor_width_m == o.floor_width_m &&
         floor_height_m == o.floor_height_m && header_bytes == o.header_bytes &&
         bucket_fraction == o.bucket_fraction && ue_activation_prob == o.ue_activation_prob &&
         n_lines == o.n_lines && machines_per_line == o.machines_per_line &&
         num_ues == o.num_ues && tau_on_s == o.tau_on_s && n_on == o.n_on &&
         scheduler_kind == o.scheduler_kind && dropping_enabled == o.dropping_enabled &&
         traffic_mix == o.traffic_mix && periodic_period_s == o.periodic_period_s &&
         aperiodic_tmin_s == o.aperiodic_tmin_s && aperiodic_tmax_s == o.aperiodic_tmax_s &&
         offered_traffic_bps == o.offered_traffic_bps &&
         mod_threshold_qam16_db == o.mod_threshold_qam16_db &&
         mod_threshold_qam64_db == o.mod_threshold_qam64_db && rng_seed == o.rng_seed &&
         preset_name == o.preset_name;
}

int derive_block_size_bytes(const ScenarioConfig& cfg) {
  if (cfg.offered_traffic_bps <= 0.0) {
    throw ValidationError("offered_traffic_bps must be > 0");
  }
  if (cfg.periodic_period_s <= 0.0) {
    throw ValidationError("periodic_period_s must be > 0");
  }
  double bytes = cfg.offered_traffic_bps * cfg.periodic_period_s / 8.0;
  auto n = static_cast<int>(std::ceil(bytes - 1e-12));
  return std::max(n, 1);
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& value, const std::string& context) {
  try {
    std::size_t pos = 0;
    double v = std::stod(value, &pos);
    if (trim(value.substr(pos)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(context + ": cannot parse number '" + value + "'");
}

/// Durations accept a unit suffix and normalize to seconds: "8ms" -> 0.008.
double parse_duration_s(const std::string& raw, const std::string& context) {
  std::string v = trim(raw);
  double scale = 1.0;
  auto ends_with = [&](const char* suffix) {
    std::size_t n = std::string(suffix).size();
    return v.size() > n && v.compare(v.size() - n, n, suffix) == 0;
  };
  if (ends_with("us")) {
    scale = 1e-6;
    v = trim(v.substr(0, v.size() - 2));
  } else if (ends_with("ms")) {
    scale = 1e-3;
    v = trim(v.substr(0, v.size() - 2));
  } else if (ends_with("s") && !std::isdigit(static_cast<unsigned char>(v.back()))) {
    scale = 1.0;
    v = trim(v.substr(0, v.size() - 1));
  }
  return parse_number(v, context) * scale;
}

bool parse_bool(const std::string& value, const std::string& context) {
  std::string t;
  for (char c : value) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw ConfigError(context + ": cannot parse flag '" + value + "'");
}

int parse_int(const std::string& value, const std::string& context) {
  double v = parse_number(value, context);
  auto n = static_cast<long long>(std::llround(v));
  if (std::abs(v - static_cast<double>(n)) > 1e-9) {
    throw ConfigError(context + ": expected integer, got '" + value + "'");
  }
  return static_cast<int>(n);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void apply_config_key(ScenarioConfig& cfg, const std::string& key, const std::string& value,
                      const std::string& context) {
  const std::string ctx = context + " key '" + key + "'";
  if (key == "carrier_frequency_hz") cfg.carrier_frequency_hz = parse_number(value, ctx);
  else if (key == "bandwidth_hz") cfg.bandwidth_hz = parse_number(value, ctx);
  else if (key == "subcarrier_spacing_hz") cfg.subcarrier_spacing_hz = parse_number(value, ctx);
  else if (key == "snr_threshold_db") cfg.snr_threshold_db = parse_number(value, ctx);
  else if (key == "noise_temperature_k") cfg.noise_temperature_k = parse_number(value, ctx);
  else if (key == "t_p_symbols") cfg.t_p_symbols = parse_int(value, ctx);
  else if (key == "t_tx_symbols") cfg.t_tx_symbols = parse_int(value, ctx);
  else if (key == "tau_p_s") cfg.tau_p_s = parse_duration_s(value, ctx);
  else if (key == "t_fh_s") cfg.t_fh_s = parse_duration_s(value, ctx);
  else if (key == "tau_fh_s") cfg.tau_fh_s = parse_duration_s(value, ctx);
  else if (key == "t_gnb_symbols") cfg.t_gnb_symbols = parse_int(value, ctx);
  else if (key == "t_cn_s") cfg.t_cn_s = parse_duration_s(value, ctx);
  else if (key == "sim_time_s") cfg.sim_time_s = parse_duration_s(value, ctx);
  else if (key == "antenna_gain_ue_db") cfg.antenna_gain_ue_db = parse_number(value, ctx);
  else if (key == "antenna_gain_gnb_db") cfg.antenna_gain_gnb_db = parse_number(value, ctx);
  else if (key == "tx_power_ul_dbm") cfg.tx_power_ul_dbm = parse_number(value, ctx);
  else if (key == "tx_power_dl_dbm") cfg.tx_power_dl_dbm = parse_number(value, ctx);
  else if (key == "inter_machine_distance_m") cfg.inter_machine_distance_m = parse_number(value, ctx);
  else if (key == "machine_side_m") cfg.machine_side_m = parse_number(value, ctx);
  else if (key == "min_machines") cfg.min_machines = parse_int(value, ctx);
  else if (key == "floor_length_m") cfg.floor_length_m = parse_number(value, ctx);
  else if (key == "floor_width_m") cfg.floor_width_m = parse_number(value, ctx);
  else if (key == "floor_height_m") cfg.floor_height_m = parse_number(value, ctx);
  else if (key == "header_bytes") cfg.header_bytes = parse_int(value, ctx);
  else if (key == "bucket_fraction") cfg.bucket_fraction = parse_number(value, ctx);
  else if (key == "ue_activation_prob") cfg.ue_activation_prob = parse_number(value, ctx);
  else if (key == "n_lines") cfg.n_lines = parse_int(value, ctx);
  else if (key == "machines_per_line") cfg.machines_per_line = parse_int(value, ctx);
  else if (key == "num_ues") cfg.num_ues = parse_int(value, ctx);
  else if (key == "tau_on_s") cfg.tau_on_s = parse_duration_s(value, ctx);
  else if (key == "n_on") cfg.n_on = parse_int(value, ctx);
  else if (key == "scheduler_kind") cfg.scheduler_kind = scheduler_kind_from_string(value);
  else if (key == "dropping_enabled") cfg.dropping_enabled = parse_bool(value, ctx);
  else if (key == "traffic_mix") cfg.traffic_mix = parse_number(value, ctx);
  else if (key == "periodic_period_s") cfg.periodic_period_s = parse_duration_s(value, ctx);
  else if (key == "aperiodic_tmin_s") cfg.aperiodic_tmin_s = parse_duration_s(value, ctx);
  else if (key == "aperiodic_tmax_s") cfg.aperiodic_tmax_s = parse_duration_s(value, ctx);
  else if (key == "offered_traffic_bps") cfg.offered_traffic_bps = parse_number(value, ctx);
  else if (key == "mod_threshold_qam16_db") cfg.mod_threshold_qam16_db = parse_number(value, ctx);
  else if (key == "mod_threshold_qam64_db") cfg.mod_threshold_qam64_db = parse_number(value, ctx);
  else if (key == "rng_seed") cfg.rng_seed = static_cast<std::uint64_t>(parse_number(value, ctx));
  else throw ConfigError(ctx + ": unknown key");
}

namespace {

void apply_preset(ScenarioConfig& cfg, const UseCasePreset& p) {
  auto note = [&cfg, &p](const char* field, double old_v, double new_v) {
    if (old_v != new_v) {
      cfg.resolution_notes.push_back("preset " + p.name + ": " + field + " " + fmt(old_v) +
                                     " -> " + fmt(new_v));
    }
  };
  note("n_lines", cfg.n_lines, p.n_lines);
  note("machines_per_line", cfg.machines_per_line, p.machines_per_line);
  note("floor_length_m", cfg.floor_length_m, p.floor_length_m);
  note("floor_width_m", cfg.floor_width_m, p.floor_width_m);
  note("floor_height_m", cfg.floor_height_m, p.floor_height_m);
  note("inter_machine_distance_m", cfg.inter_machine_distance_m, p.inter_machine_distance_m);
  note("machine_side_m", cfg.machine_side_m, p.machine_side_m);
  cfg.n_lines = p.n_lines;
  cfg.machines_per_line = p.machines_per_line;
  cfg.floor_length_m = p.floor_length_m;
  cfg.floor_width_m = p.floor_width_m;
  cfg.floor_height_m = p.floor_height_m;
  cfg.inter_machine_distance_m = p.inter_machine_distance_m;
  cfg.machine_side_m = p.machine_side_m;
  cfg.preset_name = p.name;
}

}  // namespace

ScenarioConfig load_config_text(const std::string& text, const std::string& source_name,
                                const ConfigOverrides& overrides) {
  ScenarioConfig cfg;
  std::optional<std::string> preset_key;

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    std::size_t eq = s.find('=');
    const std::string where = source_name + ":" + std::to_string(line_no);
    if (eq == std::string::npos) {
      throw ConfigError(where + ": expected key=value, got '" + s + "'");
    }
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (key == "preset") {
      preset_key = value;
      continue;
    }
    apply_config_key(cfg, key, value, where);
  }

  if (preset_key) {
    const UseCasePreset* p = find_preset(*preset_key);
    if (!p) throw ConfigError(source_name + ": unknown preset '" + *preset_key + "'");
    apply_preset(cfg, *p);
  }
  for (const auto& [k, v] : overrides) {
    if (k == "preset") {
      const UseCasePreset* p = find_preset(v);
      if (!p) throw ConfigError("override: unknown preset '" + v + "'");
      apply_preset(cfg, *p);
      continue;
    }
    apply_config_key(cfg, k, v, "override");
    cfg.resolution_notes.push_back("override: " + k + " = " + v);
  }

  // tau_on lives on the SU lattice.
  std::int64_t su = s_to_su_round(cfg.tau_on_s);
  if (su < 1) su = 1;
  double snapped = sym_to_s(su * kSymbolsPerSu);
  if (snapped != cfg.tau_on_s) {
    cfg.resolution_notes.push_back("tau_on_s snapped to " + fmt(snapped) + " (" +
                                   std::to_string(su) + " SUs)");
  }
  cfg.tau_on_s = snapped;

  validate(cfg);
  return cfg;
}

ScenarioConfig load_config_file(const std::string& path, const ConfigOverrides& overrides) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config not found: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return load_config_text(ss.str(), path, overrides);
}

void validate(const ScenarioConfig& cfg) {
  auto fail = [](const std::string& msg) { throw ValidationError(msg); };

  if (cfg.bandwidth_hz != 60e6 && cfg.bandwidth_hz != 120e6) {
    fail("bandwidth_hz must be 60e6 or 120e6");
  }
  if (cfg.subcarrier_spacing_hz != 60e3) {
    fail("subcarrier_spacing_hz must be 60e3");
  }
  if (!(cfg.bucket_fraction > 0.0 && cfg.bucket_fraction <= 1.0)) {
    fail("bucket_fraction must satisfy 0 < B_s <= 1");
  }
  if (!(cfg.ue_activation_prob >= 0.0 && cfg.ue_activation_prob <= 1.0)) {
    fail("ue_activation_prob must lie in [0, 1]");
  }
  if (!(cfg.aperiodic_tmin_s > 0.0)) fail("aperiodic_tmin_s must be > 0");
  if (!(cfg.aperiodic_tmin_s < cfg.aperiodic_tmax_s)) {
    fail("t_min < t_max violated (aperiodic_tmin_s >= aperiodic_tmax_s)");
  }
  if (!(cfg.aperiodic_tmax_s <= cfg.tau_on_s + 1e-12)) {
    fail("aperiodic_tmax_s must not exceed tau_on_s");
  }
  if (cfg.n_on < 1) fail("n_on must be >= 1");
  if (cfg.n_lines < 1) fail("n_lines must be >= 1");
  if (cfg.machines_per_line < 1) fail("machines_per_line must be >= 1");
  if (cfg.preset_name && cfg.n_lines * cfg.machines_per_line < cfg.min_machines) {
    fail("n_lines*machines_per_line below min_machines for preset");
  }
  if (cfg.tau_p_s < 0 || cfg.t_fh_s < 0 || cfg.tau_fh_s < 0 || cfg.t_cn_s < 0 ||
      cfg.t_p_symbols < 0 || cfg.t_tx_symbols < 0 || cfg.t_gnb_symbols < 0) {
    fail("fixed delay fields must be non-negative");
  }
  if (cfg.num_ues < 0) fail("num_ues must be >= 0");
  if (!(cfg.traffic_mix >= 0.0 && cfg.traffic_mix <= 1.0)) fail("traffic_mix must lie in [0, 1]");
  if (!(cfg.periodic_period_s > 0.0)) fail("periodic_period_s must be > 0");
  if (!(cfg.offered_traffic_bps > 0.0)) fail("offered_traffic_bps must be > 0");
  if (!(cfg.sim_time_s > 0.0)) fail("sim_time_s must be > 0");
  if (cfg.header_bytes < 0) fail("header_bytes must be >= 0");
  if (!(cfg.machine_side_m > 0.0)) fail("machine_side_m must be > 0");
  if (!(cfg.inter_machine_distance_m > 0.0)) fail("inter_machine_distance_m must be > 0");
  if (!(cfg.floor_length_m > 0.0 && cfg.floor_width_m > 0.0 && cfg.floor_height_m > 0.0)) {
    fail("floor dimensions must be > 0");
  }
  if (!(cfg.snr_threshold_db < cfg.mod_threshold_qam16_db &&
        cfg.mod_threshold_qam16_db < cfg.mod_threshold_qam64_db)) {
    fail("modulation thresholds must be increasing above snr_threshold_db");
  }
}

std::string emit_config(const ScenarioConfig& cfg) {
  std::ostringstream out;
  auto kv = [&out](const char* k, const std::string& v) { out << k << "=" << v << "\n"; };
  auto kvd = [&kv](const char* k, double v) { kv(k, fmt(v)); };
  auto kvi = [&kv](const char* k, long long v) { kv(k, std::to_string(v)); };

  kvd("carrier_frequency_hz", cfg.carrier_frequency_hz);
  kvd("bandwidth_hz", cfg.bandwidth_hz);
  kvd("subcarrier_spacing_hz", cfg.subcarrier_spacing_hz);
  kvd("snr_threshold_db", cfg.snr_threshold_db);
  kvd("noise_temperature_k", cfg.noise_temperature_k);
  kvi("t_p_symbols", cfg.t_p_symbols);
  kvi("t_tx_symbols", cfg.t_tx_symbols);
  kvd("tau_p_s", cfg.tau_p_s);
  kvd("t_fh_s", cfg.t_fh_s);
  kvd("tau_fh_s", cfg.tau_fh_s);
  kvi("t_gnb_symbols", cfg.t_gnb_symbols);
  kvd("t_cn_s", cfg.t_cn_s);
  kvd("sim_time_s", cfg.sim_time_s);
  kvd("antenna_gain_ue_db", cfg.antenna_gain_ue_db);
  kvd("antenna_gain_gnb_db", cfg.antenna_gain_gnb_db);
  kvd("tx_power_ul_dbm", cfg.tx_power_ul_dbm);
  kvd("tx_power_dl_dbm", cfg.tx_power_dl_dbm);
  kvd("inter_machine_distance_m", cfg.inter_machine_distance_m);
  kvd("machine_side_m", cfg.machine_side_m);
  kvi("min_machines", cfg.min_machines);
  kvd("floor_length_m", cfg.floor_length_m);
  kvd("floor_width_m", cfg.floor_width_m);
  kvd("floor_height_m", cfg.floor_height_m);
  kvi("header_bytes", cfg.header_bytes);
  kvd("bucket_fraction", cfg.bucket_fraction);
  kvd("ue_activation_prob", cfg.ue_activation_prob);
  kvi("n_lines", cfg.n_lines);
  kvi("machines_per_line", cfg.machines_per_line);
  kvi("num_ues", cfg.num_ues);
  kvd("tau_on_s", cfg.tau_on_s);
  kvi("n_on", cfg.n_on);
  kv("scheduler_kind", to_string(cfg.scheduler_kind));
  kv("dropping_enabled", cfg.dropping_enabled ? "true" : "false");
  kvd("traffic_mix", cfg.traffic_mix);
  kvd("periodic_period_s", cfg.periodic_period_s);
  kvd("aperiodic_tmin_s", cfg.aperiodic_tmin_s);
  kvd("aperiodic_tmax_s", cfg.aperiodic_tmax_s);
  kvd("offered_traffic_bps", cfg.offered_traffic_bps);
  kvd("mod_threshold_qam16_db", cfg.mod_threshold_qam16_db);
  kvd("mod_threshold_qam64_db", cfg.mod_threshold_qam64_db);
  kvi("rng_seed", static_cast<long long>(cfg.rng_seed));
  // Emitted field values already carry the preset resolution, so re-loading
  // re-applies it without conflicts.
  if (cfg.preset_name) kv("preset", *cfg.preset_name);
  return out.str();
}

}  // namespace nrsim
