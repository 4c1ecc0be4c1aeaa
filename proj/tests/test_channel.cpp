// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "nrsim/channel.hpp"
#include "nrsim/error.hpp"

using namespace nrsim;

namespace {
ScenarioConfig ar_config() {
  return load_config_text("preset=augmented_reality\nnum_ues=60\n", "test");
}
}  // namespace

TEST_CASE("scenario classification follows clutter density and antenna height") {
  auto cfg = ar_config();  // D=5, S=2, h=4
  CHECK(classify_inf_scenario(cfg).kind == InfKind::dh);

  cfg = load_config_text("preset=remote_access_maintenance\n", "test");  // D=10, S=3, h=10
  CHECK(classify_inf_scenario(cfg).kind == InfKind::sh);

  cfg = ar_config();
  cfg.floor_height_m = 1.5;  // gNB below the machine tops
  CHECK(classify_inf_scenario(cfg).kind == InfKind::dl);
  cfg.inter_machine_distance_m = 10.0;
  CHECK(classify_inf_scenario(cfg).kind == InfKind::sl);
}

TEST_CASE("LOS path loss matches an independent evaluation") {
  // 31.84 + 21.50*log10(10) + 19.00*log10(3.5), evaluated externally
  const auto& c = default_inf_constants();
  InfScenario sc{InfKind::dh, true, true};
  CHECK(path_loss_mean_db(c, sc, true, 10.0, 3.5e9) ==
        doctest::Approx(63.67729284265524).epsilon(1e-12));
  // NLOS InF-DH at the same distance: max(33.63 + 21.9*log10(10) + 20*log10(3.5), LOS)
  CHECK(path_loss_mean_db(c, sc, false, 10.0, 3.5e9) ==
        doctest::Approx(66.41136088700551).epsilon(1e-12));
}

TEST_CASE("NLOS is lower-bounded by LOS on every branch") {
  const auto& c = default_inf_constants();
  for (InfKind kind : {InfKind::sl, InfKind::dl, InfKind::sh, InfKind::dh}) {
    InfScenario sc{kind, kind == InfKind::dl || kind == InfKind::dh, true};
    for (double d = 1.0; d <= 600.0; d *= 1.7) {
      CHECK(path_loss_mean_db(c, sc, false, d, 3.5e9) >=
            path_loss_mean_db(c, sc, true, d, 3.5e9));
    }
  }
}

TEST_CASE("path loss grows strictly with distance") {
  const auto& c = default_inf_constants();
  for (InfKind kind : {InfKind::sl, InfKind::dl, InfKind::sh, InfKind::dh}) {
    InfScenario sc{kind, false, true};
    for (bool los : {true, false}) {
      double prev = -1e9;
      for (double d = 1.0; d <= 600.0; d *= 1.3) {
        double pl = path_loss_mean_db(c, sc, los, d, 3.5e9);
        CHECK(pl > prev);
        prev = pl;
      }
    }
  }
}

TEST_CASE("distance outside the model validity range is rejected") {
  const auto& c = default_inf_constants();
  InfScenario sc{InfKind::dh, true, true};
  CHECK_THROWS_AS(path_loss_mean_db(c, sc, true, 0.5, 3.5e9), ValidationError);
  CHECK_THROWS_AS(path_loss_mean_db(c, sc, true, 601.0, 3.5e9), ValidationError);
}

TEST_CASE("shadowing is zero-mean with the configured spread") {
  const auto& c = default_inf_constants();
  InfScenario sc{InfKind::dh, true, true};
  Rng rng(7, "shadow-test");
  double sum = 0.0, sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    auto [pl, sh] = path_loss_db(c, sc, true, 10.0, 3.5e9, rng);
    CHECK(pl == doctest::Approx(63.67729284265524 + sh).epsilon(1e-12));
    sum += sh;
    sq += sh * sh;
  }
  double mean = sum / n;
  double sd = std::sqrt(sq / n - mean * mean);
  CHECK(std::abs(mean) < 0.1);
  CHECK(sd == doctest::Approx(4.3).epsilon(0.02));
}

TEST_CASE("LOS probability is a clamped exponential decay") {
  const auto& c = default_inf_constants();
  InfScenario low{InfKind::sl, false, false};
  CHECK(los_probability(c, low, 0.0, 4.0, 1.0, 2.0, 2.0) == 1.0);

  // sparse, clutter size 2: k = -2/ln(0.8); frozen external evaluation at 10 m
  CHECK(los_probability(c, low, 10.0, 4.0, 1.0, 2.0, 2.0) ==
        doctest::Approx(0.32768).epsilon(1e-9));

  SUBCASE("monotone non-increasing in distance") {
    double prev = 1.0;
    for (double d = 0.0; d < 60.0; d += 1.37) {
      double p = los_probability(c, low, d, 4.0, 1.0, 2.0, 2.0);
      CHECK(p <= prev + 1e-15);
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
      prev = p;
    }
  }

  SUBCASE("dense clutter never beats sparse clutter") {
    InfScenario dense{InfKind::dl, true, false};
    for (double d = 0.5; d < 40.0; d += 0.73) {
      CHECK(los_probability(c, dense, d, 4.0, 1.0, 2.0, 2.0) <=
            los_probability(c, low, d, 4.0, 1.0, 2.0, 2.0) + 1e-15);
    }
  }

  SUBCASE("elevated antennas see farther") {
    InfScenario sh{InfKind::sh, false, true};
    // terminal at clutter height is in LOS by construction
    CHECK(los_probability(c, sh, 25.0, 10.0, 2.0, 2.0, 2.0) == 1.0);
    CHECK(los_probability(c, sh, 10.0, 4.0, 1.0, 2.0, 2.0) ==
          doctest::Approx(std::exp(-10.0 / 26.888520706347308)).epsilon(1e-9));
  }
}

TEST_CASE("link budget reproduces the thermal-noise reference point") {
  ScenarioConfig cfg;  // 23 dBm, 0 dB gains, 290 K, 60 kHz
  CHECK(snr_db(cfg, 100.0, 1) == doctest::Approx(38.40186222991542).epsilon(1e-12));

  SUBCASE("10 dB more path loss costs exactly 10 dB") {
    CHECK(snr_db(cfg, 100.0, 1) - snr_db(cfg, 110.0, 1) == doctest::Approx(10.0).epsilon(1e-12));
  }
  SUBCASE("doubling the allocation costs 3.01 dB") {
    CHECK(snr_db(cfg, 100.0, 1) - snr_db(cfg, 100.0, 2) ==
          doctest::Approx(10.0 * std::log10(2.0)).epsilon(1e-9));
  }
  SUBCASE("allocation must be positive") {
    CHECK_THROWS_AS(snr_db(cfg, 100.0, 0), ValidationError);
  }
}

TEST_CASE("modulation order steps at the configured thresholds") {
  ScenarioConfig cfg;
  CHECK(!modulation_order(-6.0, cfg).has_value());
  CHECK(modulation_order(-5.0, cfg) == 2);
  CHECK(modulation_order(0.0, cfg) == 2);
  CHECK(modulation_order(10.0, cfg) == 4);
  CHECK(modulation_order(19.999, cfg) == 4);
  CHECK(modulation_order(20.0, cfg) == 6);
  CHECK(modulation_order(25.0, cfg) == 6);
}

TEST_CASE("frozen links are adequate exactly when SNR clears the threshold") {
  auto cfg = ar_config();
  Topology topo = build_topology(cfg);
  auto links = build_links(cfg, topo, default_inf_constants());
  REQUIRE(links.size() == topo.ues.size());
  for (const auto& link : links) {
    CHECK(link.adequate == (link.snr_db >= cfg.snr_threshold_db));
    CHECK(link.distance_3d_m > 0.0);
    CHECK(link.path_loss_db > 0.0);
    if (link.adequate) {
      CHECK((link.modulation_bits_per_symbol == 2 || link.modulation_bits_per_symbol == 4 ||
             link.modulation_bits_per_symbol == 6));
    }
  }
  SUBCASE("replay equality") {
    auto again = build_links(cfg, topo, default_inf_constants());
    for (std::size_t i = 0; i < links.size(); ++i) {
      CHECK(links[i].path_loss_db == again[i].path_loss_db);
      CHECK(links[i].los == again[i].los);
      CHECK(links[i].snr_db == again[i].snr_db);
    }
  }
}

TEST_CASE("shipped constants file matches the built-in transcription") {
  auto from_file = load_inf_constants_file(std::string(NRSIM_SOURCE_DIR) +
                                           "/data/inf_pathloss.txt");
  const auto& builtin = default_inf_constants();
  CHECK(from_file.los.intercept == builtin.los.intercept);
  CHECK(from_file.los.shadow_sigma_db == builtin.los.shadow_sigma_db);
  CHECK(from_file.nlos_sl.dist_slope == builtin.nlos_sl.dist_slope);
  CHECK(from_file.nlos_dl.intercept == builtin.nlos_dl.intercept);
  CHECK(from_file.nlos_sh.shadow_sigma_db == builtin.nlos_sh.shadow_sigma_db);
  CHECK(from_file.nlos_dh.freq_slope == builtin.nlos_dh.freq_slope);
  CHECK(from_file.clutter_density_sparse == builtin.clutter_density_sparse);
  CHECK(from_file.clutter_density_dense == builtin.clutter_density_dense);

  SUBCASE("emit/parse round trip") {
    auto again = load_inf_constants_text(emit_inf_constants(from_file), "emitted");
    CHECK(again.los.intercept == from_file.los.intercept);
    CHECK(again.nlos_dh.shadow_sigma_db == from_file.nlos_dh.shadow_sigma_db);
  }
}
