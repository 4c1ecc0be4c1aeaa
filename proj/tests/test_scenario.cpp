// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "nrsim/error.hpp"
#include "nrsim/scenario.hpp"

using namespace nrsim;

TEST_CASE("use-case presets carry the published layouts") {
  const UseCasePreset* ar = find_preset("augmented_reality");
  REQUIRE(ar != nullptr);
  CHECK(ar->n_lines == 4);
  CHECK(ar->machines_per_line == 4);
  CHECK(ar->floor_length_m == 20.0);
  CHECK(ar->floor_width_m == 20.0);
  CHECK(ar->floor_height_m == 4.0);

  const UseCasePreset* rm = find_preset("remote_access_maintenance");
  REQUIRE(rm != nullptr);
  CHECK(rm->n_lines == 2);
  CHECK(rm->machines_per_line == 8);
  CHECK(rm->floor_length_m == 50.0);
  CHECK(rm->floor_width_m == 10.0);
  CHECK(rm->floor_height_m == 10.0);
}

TEST_CASE("loading a preset configures the layout") {
  auto cfg = load_config_text(
      "preset=augmented_reality\nnum_ues=60\nbandwidth_hz=60e6\n", "test");
  CHECK(cfg.n_lines == 4);
  CHECK(cfg.machines_per_line == 4);
  CHECK(cfg.num_ues == 60);
  CHECK(cfg.bandwidth_hz == 60e6);
  CHECK(cfg.preset_name.value() == "augmented_reality");
}

TEST_CASE("interval ordering violation is reported by name") {
  CHECK_THROWS_WITH_AS(
      load_config_text("aperiodic_tmin_s=7ms\naperiodic_tmax_s=6ms\n", "test"),
      doctest::Contains("t_min < t_max violated"), ValidationError);
}

TEST_CASE("defaults cover the protocol stack header") {
  auto cfg = load_config_text("", "test");
  CHECK(cfg.header_bytes == 72);
  CHECK(cfg.snr_threshold_db == -5.0);
  CHECK(cfg.noise_temperature_k == 290.0);
  CHECK(cfg.ue_activation_prob == 1.0);
  CHECK(cfg.bucket_fraction == 0.4);
  CHECK(cfg.min_machines == 16);
  CHECK(cfg.sim_time_s == 10.0);
}

TEST_CASE("block size follows offered traffic") {
  ScenarioConfig cfg;
  cfg.periodic_period_s = 2e-3;

  cfg.offered_traffic_bps = 2.75e6;
  CHECK(derive_block_size_bytes(cfg) == 688);
  cfg.offered_traffic_bps = 4.25e6;
  CHECK(derive_block_size_bytes(cfg) == 1063);
  cfg.offered_traffic_bps = 0.004e6;
  CHECK(derive_block_size_bytes(cfg) == 1);

  SUBCASE("monotone non-decreasing in G") {
    int prev = 0;
    for (double g = 0.1e6; g <= 10e6; g += 0.137e6) {
      cfg.offered_traffic_bps = g;
      int b = derive_block_size_bytes(cfg);
      CHECK(b >= prev);
      prev = b;
    }
  }
}

TEST_CASE("duration suffixes normalize to seconds") {
  auto cfg = load_config_text("tau_on_s=8ms\nperiodic_period_s=2 ms\nt_cn_s=100us\n", "test");
  CHECK(cfg.tau_on_s == doctest::Approx(8e-3).epsilon(1e-12));
  CHECK(cfg.periodic_period_s == doctest::Approx(2e-3).epsilon(1e-12));
  CHECK(cfg.t_cn_s == doctest::Approx(1e-4).epsilon(1e-12));
}

TEST_CASE("config round-trips through emit") {
  auto cfg = load_config_text(
      "preset=remote_access_maintenance\nnum_ues=80\nscheduler_kind=asps\n"
      "dropping_enabled=true\ntraffic_mix=0.5\nrng_seed=42\n",
      "test");
  auto again = load_config_text(emit_config(cfg), "emitted");
  CHECK(cfg == again);

  SUBCASE("idempotent across a second round") {
    auto third = load_config_text(emit_config(again), "emitted2");
    CHECK(again == third);
  }
}

TEST_CASE("preset fields override conflicting keys and report it") {
  auto cfg = load_config_text("n_lines=7\npreset=augmented_reality\n", "test");
  CHECK(cfg.n_lines == 4);
  bool reported = false;
  for (const auto& note : cfg.resolution_notes) {
    if (note.find("n_lines") != std::string::npos) reported = true;
  }
  CHECK(reported);

  SUBCASE("explicit overrides still win after the preset") {
    auto forced = load_config_text("preset=augmented_reality\n", "test",
                                   {{"floor_height_m", "6"}});
    CHECK(forced.floor_height_m == 6.0);
  }
}

TEST_CASE("radio numerology is restricted to the supported grid") {
  CHECK_THROWS_AS(load_config_text("bandwidth_hz=80e6\n", "test"), ValidationError);
  CHECK_THROWS_AS(load_config_text("subcarrier_spacing_hz=30e3\n", "test"), ValidationError);
  CHECK_NOTHROW(load_config_text("bandwidth_hz=120e6\n", "test"));
}

TEST_CASE("tau_on snaps onto the scheduling-unit lattice") {
  auto cfg = load_config_text("tau_on_s=8.0001e-3\n", "test");
  CHECK(cfg.tau_on_s == 8e-3);  // 64 SUs exactly
}

TEST_CASE("unknown keys and malformed lines carry location context") {
  CHECK_THROWS_WITH_AS(load_config_text("nonsense_key=3\n", "doc"),
                       doctest::Contains("doc:1"), ConfigError);
  CHECK_THROWS_AS(load_config_text("line without equals\n", "doc"), ConfigError);
}
