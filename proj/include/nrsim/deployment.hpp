// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nrsim/rng.hpp"
#include "nrsim/scenario.hpp"

namespace nrsim {

enum class TrafficKind { periodic, aperiodic };

/// Fixed cube of side S; the reference point sits halfway across the lower
/// base (cube center at z = 0).
struct Machine {
  int id = 0;
  double x = 0.0, y = 0.0, z = 0.0;
  int line_id = -1;
  int index_in_line = -1;
};

struct UserEquipment {
  int id = 0;
  double x = 0.0, y = 0.0, z = 0.0;
  int machine_id = -1;  // nearest machine, ties to the lowest id
  TrafficKind kind = TrafficKind::periodic;
};

struct Topology {
  std::vector<Machine> machines;
  std::vector<UserEquipment> ues;
  double gnb_x = 0.0, gnb_y = 0.0, gnb_z = 0.0;
  std::vector<std::vector<int>> lines;  // line_id -> machine ids ordered by index_in_line
  /// Pairwise spacing the sampler actually enforced.  Equals the configured
  /// D whenever that density is attainable; otherwise the highest rung of a
  /// bounded reduction ladder (reported, never silent).
  double enforced_min_distance_m = 0.0;
};

/// Uniform rejection sampling on the floor with pairwise reference-point
/// distance >= D.  Throws ValidationError after the per-machine attempt
/// budget is exhausted.
std::vector<Machine> place_machines(const ScenarioConfig& cfg, Rng& rng);

/// Same, reporting the spacing actually enforced (see Topology).
std::vector<Machine> place_machines_reporting(const ScenarioConfig& cfg, Rng& rng,
                                              double* enforced_distance_out);

/// Machine i joins line (i mod n_lines) at position (i div n_lines).
void assign_lines(std::vector<Machine>& machines, int n_lines);

std::vector<UserEquipment> place_ues(const ScenarioConfig& cfg,
                                     const std::vector<Machine>& machines, Rng& rng);

Topology build_topology(const ScenarioConfig& cfg);

/// Reproducibility-audit dump; byte-identical for identical topologies.
std::string dump_topology(const Topology& topo);

double distance_3d(double ax, double ay, double az, double bx, double by, double bz);

}  // namespace nrsim
