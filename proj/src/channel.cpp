// SPDX-License-Identifier: Apache-2.0

#include "nrsim/channel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nrsim/error.hpp"

namespace nrsim {

namespace {
constexpr double kBoltzmann = 1.380649e-23;  // J/K
constexpr double kMinDistance3d = 1.0;       // InF validity range, TR 38.901
constexpr double kMaxDistance3d = 600.0;
}  // namespace

const char* to_string(InfKind k) {
  switch (k) {
    case InfKind::sl: return "InF-SL";
    case InfKind::dl: return "InF-DL";
    case InfKind::sh: return "InF-SH";
    case InfKind::dh: return "InF-DH";
  }
  return "?";
}

const InfConstants& default_inf_constants() {
  // 3GPP TR 38.901 Table 7.4.1-1, InF rows.  Distances in m, frequencies in
  // GHz.  The NLOS value is floored by the LOS formula (InF-DL additionally
  // by the InF-SL formula); shadowing sigmas are per row.
  static const InfConstants c = {
      /*los=*/{31.84, 21.50, 19.00, 4.3},
      /*nlos_sl=*/{33.0, 25.5, 20.0, 5.7},
      /*nlos_dl=*/{18.6, 35.7, 20.0, 7.2},
      /*nlos_sh=*/{32.4, 23.0, 20.0, 5.9},
      /*nlos_dh=*/{33.63, 21.9, 20.0, 4.0},
      /*clutter_density_sparse=*/0.2,
      /*clutter_density_dense=*/0.6,
  };
  return c;
}

InfConstants load_inf_constants_text(const std::string& text, const std::string& source) {
  InfConstants c = default_inf_constants();
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string row_name;
    if (!(ls >> row_name)) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    if (row_name == "clutter_density") {
      if (!(ls >> c.clutter_density_sparse >> c.clutter_density_dense)) {
        throw ConfigError(where + ": clutter_density needs <sparse> <dense>");
      }
      continue;
    }
    PathLossRow row;
    if (!(ls >> row.intercept >> row.dist_slope >> row.freq_slope >> row.shadow_sigma_db)) {
      throw ConfigError(where + ": row needs <intercept> <dist_slope> <freq_slope> <sigma>");
    }
    if (row_name == "los") c.los = row;
    else if (row_name == "nlos_sl") c.nlos_sl = row;
    else if (row_name == "nlos_dl") c.nlos_dl = row;
    else if (row_name == "nlos_sh") c.nlos_sh = row;
    else if (row_name == "nlos_dh") c.nlos_dh = row;
    else throw ConfigError(where + ": unknown row '" + row_name + "'");
  }
  return c;
}

InfConstants load_inf_constants_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("constants file not found: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return load_inf_constants_text(ss.str(), path);
}

std::string emit_inf_constants(const InfConstants& c) {
  std::ostringstream out;
  char buf[160];
  auto row = [&](const char* name, const PathLossRow& r) {
    std::snprintf(buf, sizeof(buf), "%s %.17g %.17g %.17g %.17g\n", name, r.intercept,
                  r.dist_slope, r.freq_slope, r.shadow_sigma_db);
    out << buf;
  };
  row("los", c.los);
  row("nlos_sl", c.nlos_sl);
  row("nlos_dl", c.nlos_dl);
  row("nlos_sh", c.nlos_sh);
  row("nlos_dh", c.nlos_dh);
  std::snprintf(buf, sizeof(buf), "clutter_density %.17g %.17g\n", c.clutter_density_sparse,
                c.clutter_density_dense);
  out << buf;
  return out.str();
}

InfScenario classify_inf_scenario(const ScenarioConfig& cfg) {
  InfScenario sc;
  // Midpoint of the two published inter-machine distances {5, 10} m.
  sc.dense_clutter = cfg.inter_machine_distance_m <= 7.5;
  sc.elevated_tx = cfg.floor_height_m > cfg.machine_side_m;
  if (sc.elevated_tx) {
    sc.kind = sc.dense_clutter ? InfKind::dh : InfKind::sh;
  } else {
    sc.kind = sc.dense_clutter ? InfKind::dl : InfKind::sl;
  }
  return sc;
}

namespace {

double eval_row(const PathLossRow& r, double d3d_m, double fc_ghz) {
  return r.intercept + r.dist_slope * std::log10(d3d_m) + r.freq_slope * std::log10(fc_ghz);
}

void check_distance(double d3d_m) {
  if (!(d3d_m >= kMinDistance3d && d3d_m <= kMaxDistance3d)) {
    throw ValidationError("3D distance " + std::to_string(d3d_m) +
                          " m outside InF validity range [1, 600] m");
  }
}

}  // namespace

double path_loss_mean_db(const InfConstants& c, const InfScenario& sc, bool los, double d3d_m,
                         double fc_hz) {
  check_distance(d3d_m);
  const double fc_ghz = fc_hz / 1e9;
  const double pl_los = eval_row(c.los, d3d_m, fc_ghz);
  if (los) return pl_los;
  switch (sc.kind) {
    case InfKind::sl:
      return std::max(eval_row(c.nlos_sl, d3d_m, fc_ghz), pl_los);
    case InfKind::dl:
      return std::max({eval_row(c.nlos_dl, d3d_m, fc_ghz), eval_row(c.nlos_sl, d3d_m, fc_ghz),
                       pl_los});
    case InfKind::sh:
      return std::max(eval_row(c.nlos_sh, d3d_m, fc_ghz), pl_los);
    case InfKind::dh:
      return std::max(eval_row(c.nlos_dh, d3d_m, fc_ghz), pl_los);
  }
  return pl_los;
}

double shadow_sigma_db(const InfConstants& c, const InfScenario& sc, bool los) {
  if (los) return c.los.shadow_sigma_db;
  switch (sc.kind) {
    case InfKind::sl: return c.nlos_sl.shadow_sigma_db;
    case InfKind::dl: return c.nlos_dl.shadow_sigma_db;
    case InfKind::sh: return c.nlos_sh.shadow_sigma_db;
    case InfKind::dh: return c.nlos_dh.shadow_sigma_db;
  }
  return 0.0;
}

std::pair<double, double> path_loss_db(const InfConstants& c, const InfScenario& sc, bool los,
                                       double d3d_m, double fc_hz, Rng& rng) {
  double mean = path_loss_mean_db(c, sc, los, d3d_m, fc_hz);
  double shadow = rng.normal(0.0, shadow_sigma_db(c, sc, los));
  return {mean + shadow, shadow};
}

double los_probability(const InfConstants& c, const InfScenario& sc, double d2d_m, double h_bs_m,
                       double h_ut_m, double clutter_size_m, double clutter_height_m) {
  if (d2d_m < 0.0) throw ValidationError("d2d must be >= 0");
  if (d2d_m == 0.0) return 1.0;
  const double r = sc.dense_clutter ? c.clutter_density_dense : c.clutter_density_sparse;
  double k = -clutter_size_m / std::log(1.0 - r);
  if (sc.elevated_tx) {
    // TR 38.901 Table 7.4.2-1, InF-SH/DH: antennas above the clutter see an
    // elongated decay constant.  A terminal at or above clutter height is in
    // LOS by construction.
    if (h_ut_m >= clutter_height_m - 1e-12) return 1.0;
    k *= (h_bs_m - h_ut_m) / (clutter_height_m - h_ut_m);
  }
  if (!(k > 0.0)) return 0.0;
  double p = std::exp(-d2d_m / k);
  return std::clamp(p, 0.0, 1.0);
}

double snr_db(const ScenarioConfig& cfg, double path_loss_db_value, int allocated_rbs) {
  if (allocated_rbs < 1) throw ValidationError("allocated_rbs must be >= 1");
  const double noise_bw_hz = 12.0 * cfg.subcarrier_spacing_hz * allocated_rbs;
  const double noise_dbm =
      10.0 * std::log10(kBoltzmann * cfg.noise_temperature_k * noise_bw_hz) + 30.0;
  return cfg.tx_power_ul_dbm + cfg.antenna_gain_ue_db + cfg.antenna_gain_gnb_db -
         path_loss_db_value - noise_dbm;
}

std::optional<int> modulation_order(double snr_db_value, const ScenarioConfig& cfg) {
  if (snr_db_value < cfg.snr_threshold_db) return std::nullopt;
  if (snr_db_value < cfg.mod_threshold_qam16_db) return 2;
  if (snr_db_value < cfg.mod_threshold_qam64_db) return 4;
  return 6;
}

std::vector<LinkState> build_links(const ScenarioConfig& cfg, const Topology& topo,
                                   const InfConstants& constants) {
  const InfScenario sc = classify_inf_scenario(cfg);
  std::vector<LinkState> links;
  links.reserve(topo.ues.size());
  for (const auto& ue : topo.ues) {
    Rng rng(cfg.rng_seed, "link", static_cast<std::uint64_t>(ue.id));
    LinkState link;
    link.ue_id = ue.id;
    double dx = ue.x - topo.gnb_x, dy = ue.y - topo.gnb_y;
    double d2d = std::sqrt(dx * dx + dy * dy);
    link.distance_3d_m = distance_3d(ue.x, ue.y, ue.z, topo.gnb_x, topo.gnb_y, topo.gnb_z);
    double d3d = std::clamp(link.distance_3d_m, kMinDistance3d, kMaxDistance3d);

    double p_los = los_probability(constants, sc, d2d, topo.gnb_z, ue.z, cfg.machine_side_m,
                                   cfg.machine_side_m);
    link.los = rng.bernoulli(p_los);
    auto [pl, shadow] =
        path_loss_db(constants, sc, link.los, d3d, cfg.carrier_frequency_hz, rng);
    link.path_loss_db = pl;
    link.shadowing_db = shadow;
    link.snr_db = snr_db(cfg, pl, 1);
    auto order = modulation_order(link.snr_db, cfg);
    link.adequate = order.has_value();
    link.modulation_bits_per_symbol = order.value_or(0);
    sim_check(link.adequate == (link.snr_db >= cfg.snr_threshold_db),
              "adequacy flag inconsistent with SNR threshold");
    links.push_back(link);
  }
  return links;
}

}  // namespace nrsim
