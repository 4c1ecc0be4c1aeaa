// SPDX-License-Identifier: Apache-2.0

#include "nrsim/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "nrsim/error.hpp"

namespace nrsim {

ActivationSchedule build_activation_schedule(const ScenarioConfig& cfg,
                                             const FrameParams& frame) {
  ActivationSchedule s;
  s.period_su = frame.period_su;
  s.window_su = frame.window_su;
  s.machines_per_line = cfg.machines_per_line;
  const double total_su = cfg.sim_time_s / frame.su_duration_s;
  s.n_slots = static_cast<std::int64_t>(std::ceil(total_su / frame.period_su));
  return s;
}

std::vector<int> activate_ues(const ActivationSchedule& schedule, std::int64_t slot,
                              const Topology& topo, double p, std::uint64_t master_seed) {
  const int idx = schedule.active_index(slot);
  std::vector<int> active;
  for (const auto& ue : topo.ues) {
    const Machine& m = topo.machines[ue.machine_id];
    if (m.index_in_line != idx) continue;
    // One stream per UE; one draw per own-machine activation keeps replay
    // stable when other UEs change.
    Rng rng(master_seed, "ue_activation", static_cast<std::uint64_t>(ue.id) * 1000003ULL +
                                              static_cast<std::uint64_t>(slot));
    if (rng.bernoulli(p)) active.push_back(ue.id);
  }
  return active;
}

std::vector<std::int64_t> gen_periodic_offsets_sym(std::int64_t window_sym,
                                                   std::int64_t tau_sym) {
  sim_check(tau_sym > 0, "periodic period must be positive");
  std::vector<std::int64_t> out;
  for (std::int64_t t = 0; t < window_sym; t += tau_sym) out.push_back(t);
  return out;
}

std::pair<double, std::optional<double>> gen_aperiodic_offsets(double t_min_s, double t_max_s,
                                                               double tau_on_s, Rng& rng) {
  sim_check(0.0 < t_min_s && t_min_s < t_max_s && t_max_s <= tau_on_s + 1e-12,
            "aperiodic interval bounds invalid");
  const double first = rng.uniform(t_min_s, (t_min_s + t_max_s) / 2.0);
  const double gap = rng.uniform(t_min_s, t_max_s);  // always drawn: stable draw counts
  const double second = first + gap;
  if (second < tau_on_s) return {first, second};
  return {first, std::nullopt};
}

namespace {

std::int64_t tau_to_sym(double tau_s) {
  auto sym = static_cast<std::int64_t>(std::llround(tau_s / symbol_duration_s()));
  return std::max<std::int64_t>(sym, 1);
}

}  // namespace

Timeline build_timeline(const ScenarioConfig& cfg, const Topology& topo,
                        const std::vector<LinkState>& links, const ActivationSchedule& schedule,
                        const FrameParams& frame) {
  Timeline tl;
  tl.slot_active.assign(static_cast<std::size_t>(schedule.n_slots),
                        std::vector<char>(topo.ues.size(), 0));

  const int payload = derive_block_size_bytes(cfg);
  const int pdu = payload + cfg.header_bytes;
  const std::int64_t tau_sym = tau_to_sym(cfg.periodic_period_s);
  const std::int64_t window_sym = frame.window_su * kSymbolsPerSu;
  const double sim_end_s = cfg.sim_time_s;

  std::vector<Rng> arrival_rngs;
  arrival_rngs.reserve(topo.ues.size());
  for (const auto& ue : topo.ues) {
    arrival_rngs.emplace_back(cfg.rng_seed, "ue_arrival", static_cast<std::uint64_t>(ue.id));
  }

  std::int64_t next_id = 0;
  for (std::int64_t slot = 0; slot < schedule.n_slots; ++slot) {
    const std::int64_t slot_start_sym = schedule.slot_start_su(slot) * kSymbolsPerSu;
    const double slot_start_s = sym_to_s(slot_start_sym);
    const std::int64_t deadline = schedule.slot_deadline_sym(slot);
    const auto active = activate_ues(schedule, slot, topo, cfg.ue_activation_prob, cfg.rng_seed);
    for (int ue_id : active) {
      tl.slot_active[static_cast<std::size_t>(slot)][static_cast<std::size_t>(ue_id)] = 1;
      const LinkState& link = links[static_cast<std::size_t>(ue_id)];

      auto emit = [&](double raw_s, std::int64_t sym) {
        if (raw_s >= sim_end_s) return;
        DataBlock b;
        b.id = next_id++;
        b.ue_id = ue_id;
        b.gen_raw_s = raw_s;
        b.gen_sym = sym;
        b.ready_sym = sym + cfg.t_p_symbols;
        b.payload_bytes = payload;
        b.pdu_bytes = pdu;
        b.rbs_required =
            link.adequate ? rbs_needed(pdu, link.modulation_bits_per_symbol, frame) : 0;
        b.remaining_rbs = b.rbs_required;
        b.slot_index = slot;
        b.deadline_sym = deadline;
        if (!link.adequate) {
          b.state = BlockState::dropped;  // counted lost at generation
          ++tl.lost_at_generation;
        }
        sim_check(sym >= slot_start_sym && sym < slot_start_sym + window_sym + kSymbolsPerSu,
                  "generation outside its activation window");
        tl.blocks.push_back(b);
      };

      if (topo.ues[static_cast<std::size_t>(ue_id)].kind == TrafficKind::periodic) {
        for (std::int64_t off : gen_periodic_offsets_sym(window_sym, tau_sym)) {
          const std::int64_t sym = slot_start_sym + off;
          emit(sym_to_s(sym), sym);
        }
      } else {
        auto [first, second] =
            gen_aperiodic_offsets(cfg.aperiodic_tmin_s, cfg.aperiodic_tmax_s, cfg.tau_on_s,
                                  arrival_rngs[static_cast<std::size_t>(ue_id)]);
        double t1 = slot_start_s + first;
        emit(t1, s_to_sym_ceil(t1));
        if (second) {
          double t2 = slot_start_s + *second;
          emit(t2, s_to_sym_ceil(t2));
        }
      }
    }
  }

  std::stable_sort(tl.blocks.begin(), tl.blocks.end(), [](const DataBlock& a, const DataBlock& b) {
    if (a.gen_sym != b.gen_sym) return a.gen_sym < b.gen_sym;
    return a.ue_id < b.ue_id;
  });
  for (std::size_t i = 0; i < tl.blocks.size(); ++i) {
    // re-number so ids follow the timeline order
    tl.blocks[i].id = static_cast<std::int64_t>(i);
  }
  return tl;
}

std::string dump_arrivals(const Timeline& tl) {
  std::ostringstream out;
  out << "ue_id,time_s,bytes\n";
  char buf[96];
  for (const auto& b : tl.blocks) {
    std::snprintf(buf, sizeof(buf), "%d,%.9f,%d\n", b.ue_id, b.gen_raw_s, b.pdu_bytes);
    out << buf;
  }
  return out.str();
}

}  // namespace nrsim
