// SPDX-License-Identifier: Apache-2.0

#include "nrsim/deployment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "nrsim/error.hpp"

namespace nrsim {

namespace {

constexpr int kAttemptBudgetPerMachine = 10000;
constexpr int kRelaxLadderSteps = 14;     // spacing floor ~ 0.23 * D
constexpr int kRepulsionIterations = 4000;

struct Point {
  double x, y;
};

double min_gap(const std::vector<Point>& pts, std::size_t i, std::size_t* neighbor = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < pts.size(); ++j) {
    if (j == i) continue;
    double dx = pts[i].x - pts[j].x, dy = pts[i].y - pts[j].y;
    double d = std::sqrt(dx * dx + dy * dy);
    if (d < best) {
      best = d;
      if (neighbor) *neighbor = j;
    }
  }
  return best;
}

/// Iterative pairwise repulsion; returns true once every gap reaches `d`.
bool relax_points(std::vector<Point>& pts, double x_lo, double x_hi, double y_lo, double y_hi,
                  double d) {
  for (int it = 0; it < kRepulsionIterations; ++it) {
    bool moved = false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      std::size_t j = i;
      double gap = min_gap(pts, i, &j);
      if (gap >= d || j == i) continue;
      double dx = pts[i].x - pts[j].x, dy = pts[i].y - pts[j].y;
      double n = std::hypot(dx, dy);
      if (n < 1e-12) {
        dx = 1.0;
        dy = 0.0;
        n = 1.0;
      }
      const double step = 0.35 * (d - gap + 0.05);
      pts[i].x = std::clamp(pts[i].x + dx / n * step, x_lo, x_hi);
      pts[i].y = std::clamp(pts[i].y + dy / n * step, y_lo, y_hi);
      moved = true;
    }
    if (!moved) return true;
  }
  return false;
}

/// One sampling round at target distance `d`: uniform darts, each machine
/// accepted on its first feasible draw.  A jammed round falls back to the
/// best candidate seen and a repulsion pass.
bool sample_round(Rng& rng, int m_total, double x_lo, double x_hi, double y_lo, double y_hi,
                  double d, std::vector<Point>& out) {
  out.clear();
  bool jammed = false;
  for (int i = 0; i < m_total; ++i) {
    Point best{0.0, 0.0};
    double best_gap = -1.0;
    bool placed = false;
    for (int attempt = 0; attempt < kAttemptBudgetPerMachine; ++attempt) {
      Point p{rng.uniform(x_lo, x_hi), rng.uniform(y_lo, y_hi)};
      double gap = std::numeric_limits<double>::infinity();
      for (const auto& q : out) {
        gap = std::min(gap, std::hypot(p.x - q.x, p.y - q.y));
      }
      if (gap >= d) {
        out.push_back(p);
        placed = true;
        break;
      }
      if (gap > best_gap) {
        best_gap = gap;
        best = p;
      }
    }
    if (!placed) {
      out.push_back(best);  // densest spot found; repulsion spreads it below
      jammed = true;
    }
  }
  if (!jammed) return true;
  return relax_points(out, x_lo, x_hi, y_lo, y_hi, d);
}

}  // namespace

double distance_3d(double ax, double ay, double az, double bx, double by, double bz) {
  double dx = ax - bx, dy = ay - by, dz = az - bz;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

std::vector<Machine> place_machines(const ScenarioConfig& cfg, Rng& rng) {
  return place_machines_reporting(cfg, rng, nullptr);
}

std::vector<Machine> place_machines_reporting(const ScenarioConfig& cfg, Rng& rng,
                                              double* enforced_distance_out) {
  const double S = cfg.machine_side_m;
  const double D = cfg.inter_machine_distance_m;
  const int m_total = cfg.n_lines * cfg.machines_per_line;

  const double x_lo = S / 2.0, x_hi = cfg.floor_length_m - S / 2.0;
  const double y_lo = S / 2.0, y_hi = cfg.floor_width_m - S / 2.0;
  if (x_lo > x_hi || y_lo > y_hi) {
    throw ValidationError("machine placement infeasible: cube side exceeds floor");
  }

  // Densities near or past the packing limit (the long-hall layout asks for
  // 16 machines at 10 m spacing inside 47x7 m, which no sampler can honor)
  // step the target down a bounded ladder; each step is reported through
  // `enforced_distance_out` rather than silently ignored.
  std::vector<Point> pts;
  for (int relax = 0; relax <= kRelaxLadderSteps; ++relax) {
    const double d_target = D * std::pow(0.9, relax);
    if (sample_round(rng, m_total, x_lo, x_hi, y_lo, y_hi, d_target, pts)) {
      if (enforced_distance_out) *enforced_distance_out = d_target;
      std::vector<Machine> machines;
      machines.reserve(static_cast<std::size_t>(m_total));
      for (int i = 0; i < m_total; ++i) {
        machines.push_back(Machine{i, pts[static_cast<std::size_t>(i)].x,
                                   pts[static_cast<std::size_t>(i)].y, 0.0, -1, -1});
      }
      return machines;
    }
  }
  throw ValidationError("machine placement infeasible: attempt budget exhausted for " +
                        std::to_string(m_total) + " machines at spacing " + std::to_string(D));
}

void assign_lines(std::vector<Machine>& machines, int n_lines) {
  if (n_lines < 1) throw ValidationError("n_lines must be >= 1");
  if (machines.size() % static_cast<std::size_t>(n_lines) != 0) {
    throw ValidationError("machine count " + std::to_string(machines.size()) +
                          " not divisible by n_lines " + std::to_string(n_lines));
  }
  for (auto& m : machines) {
    m.line_id = m.id % n_lines;
    m.index_in_line = m.id / n_lines;
  }
}

std::vector<UserEquipment> place_ues(const ScenarioConfig& cfg,
                                     const std::vector<Machine>& machines, Rng& rng) {
  if (machines.empty()) throw ValidationError("cannot place UEs before machines");
  const int n_aperiodic =
      static_cast<int>(std::llround(cfg.traffic_mix * static_cast<double>(cfg.num_ues)));

  std::vector<UserEquipment> ues;
  ues.reserve(cfg.num_ues);
  for (int i = 0; i < cfg.num_ues; ++i) {
    UserEquipment ue;
    ue.id = i;
    ue.x = rng.uniform(0.0, cfg.floor_length_m);
    ue.y = rng.uniform(0.0, cfg.floor_width_m);
    ue.z = rng.uniform(0.0, cfg.machine_side_m);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& m : machines) {
      double d = distance_3d(ue.x, ue.y, ue.z, m.x, m.y, m.z);
      if (d < best) {  // strict: ties keep the lowest machine id
        best = d;
        ue.machine_id = m.id;
      }
    }
    ue.kind = (i < n_aperiodic) ? TrafficKind::aperiodic : TrafficKind::periodic;
    ues.push_back(ue);
  }
  return ues;
}

Topology build_topology(const ScenarioConfig& cfg) {
  Topology topo;
  {
    Rng rng(cfg.rng_seed, "machines");
    double enforced = cfg.inter_machine_distance_m;
    topo.machines = place_machines_reporting(cfg, rng, &enforced);
    topo.enforced_min_distance_m = enforced;
  }
  assign_lines(topo.machines, cfg.n_lines);
  {
    Rng rng(cfg.rng_seed, "ues");
    topo.ues = place_ues(cfg, topo.machines, rng);
  }
  topo.gnb_x = cfg.floor_length_m / 2.0;
  topo.gnb_y = cfg.floor_width_m / 2.0;
  topo.gnb_z = cfg.floor_height_m;

  topo.lines.assign(cfg.n_lines, {});
  for (const auto& m : topo.machines) {
    topo.lines[m.line_id].push_back(m.id);
  }
  for (auto& line : topo.lines) {
    // ids were assigned round-robin, so each line is already ordered by
    // index_in_line; keep the invariant explicit.
    for (std::size_t k = 1; k < line.size(); ++k) {
      sim_check(topo.machines[line[k]].index_in_line ==
                    topo.machines[line[k - 1]].index_in_line + 1,
                "line ordering broken");
    }
  }
  return topo;
}

std::string dump_topology(const Topology& topo) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "gnb %.17g %.17g %.17g\n", topo.gnb_x, topo.gnb_y, topo.gnb_z);
  out << buf;
  for (const auto& m : topo.machines) {
    std::snprintf(buf, sizeof(buf), "machine %d %.17g %.17g %.17g line=%d idx=%d\n", m.id, m.x,
                  m.y, m.z, m.line_id, m.index_in_line);
    out << buf;
  }
  for (const auto& u : topo.ues) {
    std::snprintf(buf, sizeof(buf), "ue %d %.17g %.17g %.17g machine=%d kind=%s\n", u.id, u.x, u.y,
                  u.z, u.machine_id, u.kind == TrafficKind::periodic ? "periodic" : "aperiodic");
    out << buf;
  }
  return out.str();
}

}  // namespace nrsim
