// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nrsim/deployment.hpp"
#include "nrsim/rng.hpp"
#include "nrsim/scenario.hpp"

namespace nrsim {

/// Indoor-factory sub-scenarios of TR 38.901: sparse/dense clutter crossed
/// with Tx antennas below/above clutter height.
enum class InfKind { sl, dl, sh, dh };

const char* to_string(InfKind k);

struct InfScenario {
  InfKind kind = InfKind::dh;
  bool dense_clutter = false;
  bool elevated_tx = false;
};

/// One path-loss row: PL = intercept + dist_slope*log10(d3d_m)
///                        + freq_slope*log10(fc_GHz), plus N(0, sigma) shadowing.
struct PathLossRow {
  double intercept = 0.0;
  double dist_slope = 0.0;
  double freq_slope = 0.0;
  double shadow_sigma_db = 0.0;
};

struct InfConstants {
  PathLossRow los;
  PathLossRow nlos_sl, nlos_dl, nlos_sh, nlos_dh;
  double clutter_density_sparse = 0.2;  // proportion of floor area, r < 0.4
  double clutter_density_dense = 0.6;   // r >= 0.4
};

/// TR 38.901 Table 7.4.1-1 coefficients (built-in transcription).
const InfConstants& default_inf_constants();

/// Parses the external constants-file format (see data/inf_pathloss.txt).
InfConstants load_inf_constants_text(const std::string& text, const std::string& source);
InfConstants load_inf_constants_file(const std::string& path);
std::string emit_inf_constants(const InfConstants& c);

/// Dense clutter iff D <= 7.5 m; elevated Tx iff the gNB sits above the
/// machine tops (h > S).
InfScenario classify_inf_scenario(const ScenarioConfig& cfg);

/// Mean path loss without the shadowing term.  NLOS is lower-bounded by the
/// LOS formula (and by the SL formula for InF-DL) as the TR requires.
double path_loss_mean_db(const InfConstants& c, const InfScenario& sc, bool los, double d3d_m,
                         double fc_hz);

/// (path_loss_db, shadowing_db); shadowing ~ N(0, sigma) from `rng`.
std::pair<double, double> path_loss_db(const InfConstants& c, const InfScenario& sc, bool los,
                                       double d3d_m, double fc_hz, Rng& rng);

double shadow_sigma_db(const InfConstants& c, const InfScenario& sc, bool los);

/// Exponential-decay LOS probability with clutter size/height = S and the
/// density class from the D classification.  P(0) = 1.
double los_probability(const InfConstants& c, const InfScenario& sc, double d2d_m,
                       double h_bs_m, double h_ut_m, double clutter_size_m,
                       double clutter_height_m);

/// Thermal-noise link budget over `allocated_rbs` resource blocks
/// (12 subcarriers each); noise figure 0 dB.
double snr_db(const ScenarioConfig& cfg, double path_loss_db, int allocated_rbs);

/// Step mapping to bits per symbol; nullopt below the adequacy threshold.
std::optional<int> modulation_order(double snr_db_value, const ScenarioConfig& cfg);

struct LinkState {
  int ue_id = -1;
  double distance_3d_m = 0.0;
  bool los = false;
  double path_loss_db = 0.0;
  double shadowing_db = 0.0;
  double snr_db = 0.0;  // at the one-RB reference bandwidth
  int modulation_bits_per_symbol = 0;  // 0 when inadequate
  bool adequate = false;
};

/// Draws LOS state and shadowing once per link and freezes them (static
/// scenario, all nodes fixed).
std::vector<LinkState> build_links(const ScenarioConfig& cfg, const Topology& topo,
                                   const InfConstants& constants);

}  // namespace nrsim
