// SPDX-License-Identifier: Apache-2.0

#include "nrsim/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

#include "nrsim/error.hpp"

namespace nrsim {

namespace {

constexpr double kUrllcBudgetS = 1e-3;

double fixed_overhead_s(const ScenarioConfig& cfg) {
  return sym_to_s(cfg.t_p_symbols) + sym_to_s(cfg.t_tx_symbols) + cfg.tau_p_s + cfg.t_fh_s +
         cfg.tau_fh_s + sym_to_s(cfg.t_gnb_symbols) + cfg.t_cn_s;
}

bool demand_order(const Demand* a, const Demand* b) {
  if (a->deadline_sym != b->deadline_sym) return a->deadline_sym < b->deadline_sym;
  if (a->tag_sym != b->tag_sym) return a->tag_sym < b->tag_sym;
  if (a->ue_id != b->ue_id) return a->ue_id < b->ue_id;
  return a->seq < b->seq;
}

}  // namespace

std::vector<GrantSlice> allocate_edf_ff(std::vector<Demand>& demands, const FrameParams& frame,
                                        std::int64_t su_begin, std::int64_t su_end,
                                        double bucket_fraction) {
  std::vector<GrantSlice> slices;
  if (demands.empty()) return slices;

  std::vector<std::size_t> arrival_order(demands.size());
  for (std::size_t i = 0; i < demands.size(); ++i) arrival_order[i] = i;
  std::stable_sort(arrival_order.begin(), arrival_order.end(), [&](std::size_t a, std::size_t b) {
    return demands[a].earliest_su < demands[b].earliest_su;
  });

  std::vector<Demand*> active;
  active.reserve(demands.size());
  std::vector<Demand*> eligible;
  std::vector<int> granted_now;
  std::size_t next_arrival = 0;
  std::size_t open_demands = 0;
  for (const auto& d : demands) {
    if (d.remaining > 0) ++open_demands;
  }

  for (std::int64_t su = su_begin; su < su_end; ++su) {
    while (next_arrival < arrival_order.size() &&
           demands[arrival_order[next_arrival]].earliest_su <= su) {
      Demand* d = &demands[arrival_order[next_arrival]];
      if (d->remaining > 0) active.push_back(d);
      ++next_arrival;
    }
    if (open_demands == 0 && next_arrival == arrival_order.size()) break;
    const int cap = frame.capacity_rbs(su);
    if (cap <= 0 || active.empty()) continue;

    const bool is_guard = frame.purpose(su) == SuPurpose::guard;
    const std::int64_t guard_slot = is_guard ? frame.slot_of_su(su) : -1;

    eligible.clear();
    for (Demand* d : active) {
      if (d->remaining <= 0) continue;
      if (is_guard && d->guard_slot != guard_slot) continue;
      eligible.push_back(d);
    }
    if (eligible.empty()) {
      // prune exhausted entries opportunistically
      active.erase(std::remove_if(active.begin(), active.end(),
                                  [](Demand* d) { return d->remaining <= 0; }),
                   active.end());
      continue;
    }
    std::stable_sort(eligible.begin(), eligible.end(), demand_order);

    granted_now.assign(eligible.size(), 0);
    int left = cap;
    // pass 1: fair-first bucket
    for (std::size_t i = 0; i < eligible.size() && left > 0; ++i) {
      Demand* d = eligible[i];
      const int bucket = std::max(
          1, static_cast<int>(std::ceil(bucket_fraction * d->rbs_total - 1e-12)));
      int g = std::min({d->remaining, bucket, left});
      granted_now[i] += g;
      d->remaining -= g;
      left -= g;
    }
    // pass 2: top up beyond the bucket in the same order
    for (std::size_t i = 0; i < eligible.size() && left > 0; ++i) {
      Demand* d = eligible[i];
      int g = std::min(d->remaining, left);
      granted_now[i] += g;
      d->remaining -= g;
      left -= g;
    }

    int cursor = 0;
    for (std::size_t i = 0; i < eligible.size(); ++i) {
      if (granted_now[i] <= 0) continue;
      Demand* d = eligible[i];
      GrantSlice s;
      s.su = su;
      s.ue_id = d->ue_id;
      s.intended_block = d->intended_block;
      s.rb_start = cursor;
      s.rb_count = granted_now[i];
      s.guard_slot = d->guard_slot;
      s.demand_seq = d->seq;
      cursor += granted_now[i];
      slices.push_back(s);
      if (d->remaining == 0) --open_demands;
    }
    sim_check(cursor <= cap, "RB allocation exceeds SU capacity");

    active.erase(std::remove_if(active.begin(), active.end(),
                                [](Demand* d) { return d->remaining <= 0; }),
                 active.end());
  }
  return slices;
}

namespace {

/// Shared demand construction for the three policies.
class DemandBuilder {
public:
  DemandBuilder(const SimView& view, const CycleInfo& cycle) : view_(view), cycle_(cycle) {
    const auto& cfg = *view_.cfg;
    payload_ = derive_block_size_bytes(cfg);
    pdu_ = payload_ + cfg.header_bytes;
    budget_offset_sym_ = (kUrllcBudgetS - fixed_overhead_s(cfg)) / symbol_duration_s();
    tau_sym_ = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::llround(cfg.periodic_period_s / symbol_duration_s())));
    mid_offset_sym_ =
        (cfg.aperiodic_tmin_s + cfg.aperiodic_tmax_s) / 2.0 / symbol_duration_s();
  }

  std::vector<Demand> take() { return std::move(demands_); }

  int rbs_for_ue(int ue_id) const {
    const LinkState& link = (*view_.links)[static_cast<std::size_t>(ue_id)];
    if (!link.adequate) return 0;
    return rbs_needed(pdu_, link.modulation_bits_per_symbol, *view_.frame);
  }

  /// Demand for a concrete queued block.
  void add_block(const DataBlock& b) {
    if (b.remaining_rbs <= 0) return;
    Demand d;
    d.ue_id = b.ue_id;
    d.intended_block = b.id;
    d.tag_sym = b.gen_raw_s / symbol_duration_s();
    d.deadline_sym = d.tag_sym + budget_offset_sym_;
    d.earliest_su = std::max<std::int64_t>(
        cycle_.start_su, (b.ready_sym + kSymbolsPerSu - 1) / kSymbolsPerSu);
    d.guard_slot = b.slot_index;
    d.rbs_total = b.rbs_required;
    d.remaining = b.remaining_rbs;
    push(d);
  }

  /// Demand for a predicted generation at (fractional) symbol time
  /// `tag_sym`; the earliest SU honors the PDU preparation time.
  void add_predicted(int ue_id, double tag_sym, int rbs,
                     std::optional<std::int64_t> earliest_su_override = std::nullopt) {
    if (rbs <= 0) return;
    Demand d;
    d.ue_id = ue_id;
    d.tag_sym = tag_sym;
    d.deadline_sym = tag_sym + budget_offset_sym_;
    std::int64_t earliest =
        earliest_su_override
            ? *earliest_su_override
            : static_cast<std::int64_t>(
                  std::ceil((tag_sym + view_.cfg->t_p_symbols) / kSymbolsPerSu - 1e-9));
    d.earliest_su = std::max(earliest, cycle_.start_su);
    if (d.earliest_su >= cycle_.end_su) return;  // belongs to a later plan
    d.guard_slot = static_cast<std::int64_t>(tag_sym) / (view_.frame->period_su * kSymbolsPerSu);
    d.rbs_total = rbs;
    d.remaining = rbs;
    push(d);
  }

  /// All demands one UE contributes for one activation window.
  /// `skip_tags_at_or_before` suppresses predicted generations already
  /// visible as queued blocks (request-driven planning).
  void add_ue_window(int ue_id, double slot_start_sym, double window_sym,
                     double skip_tags_at_or_before = -1.0) {
    const int rbs = rbs_for_ue(ue_id);
    if (rbs <= 0) return;
    const auto& ue = view_.topo->ues[static_cast<std::size_t>(ue_id)];
    if (ue.kind == TrafficKind::periodic) {
      for (double off = 0.0; off < window_sym - 1e-9;
           off += static_cast<double>(tau_sym_)) {
        const double tag = slot_start_sym + off;
        if (tag <= skip_tags_at_or_before) continue;
        add_predicted(ue_id, tag, rbs);
      }
    } else {
      // One opportunity at the midpoint of the first-packet interval, two in
      // the last data SUs of the window.
      add_predicted(ue_id, slot_start_sym + mid_offset_sym_, rbs);
      const auto end_su =
          static_cast<std::int64_t>(std::floor((slot_start_sym + window_sym) / kSymbolsPerSu + 1e-9));
      for (std::int64_t target : {end_su - 2, end_su - 1}) {
        if (target < cycle_.start_su) continue;
        const double tag = static_cast<double>(target * kSymbolsPerSu - view_.cfg->t_p_symbols);
        add_predicted(ue_id, tag, rbs, target);
      }
    }
  }

private:
  void push(Demand d) {
    d.seq = static_cast<int>(demands_.size());
    demands_.push_back(d);
  }

  const SimView& view_;
  const CycleInfo& cycle_;
  std::vector<Demand> demands_;
  int payload_ = 0;
  int pdu_ = 0;
  double budget_offset_sym_ = 0.0;
  std::int64_t tau_sym_ = 1;
  double mid_offset_sym_ = 0.0;
};

std::vector<std::vector<int>> ues_by_machine(const Topology& topo) {
  std::vector<std::vector<int>> out(topo.machines.size());
  for (const auto& ue : topo.ues) {
    out[static_cast<std::size_t>(ue.machine_id)].push_back(ue.id);
  }
  return out;
}

/// Baseline: serves only what the requesting UEs expose — their queued
/// backlog plus one activation window of predicted generations.  UEs
/// activating mid-cycle wait for their next PUCCH opportunity.
class BspsPolicy : public SchedulerPolicy {
public:
  std::vector<Demand> plan_cycle(const SimView& view, const CycleInfo& cycle,
                                 const std::vector<SchedulingRequest>& requests) override {
    DemandBuilder builder(view, cycle);
    const auto& frame = *view.frame;
    const std::int64_t slot = cycle.start_su / frame.period_su;
    const double slot_start_sym = static_cast<double>(slot * frame.period_su * kSymbolsPerSu);
    const double window_sym = static_cast<double>(frame.window_su * kSymbolsPerSu);
    const double pucch_sym = static_cast<double>(cycle.start_su * kSymbolsPerSu);
    for (const auto& req : requests) {
      for (std::int64_t id : req.queued_block_ids) {
        builder.add_block((*view.blocks)[static_cast<std::size_t>(id)]);
      }
      builder.add_ue_window(req.ue_id, slot_start_sym, window_sym,
                            /*skip_tags_at_or_before=*/pucch_sym);
    }
    return builder.take();
  }
};

/// Smart: full knowledge of the activation schedule and traffic statistics;
/// pre-allocates every predicted generation of the whole cycle.
class SspsPolicy : public SchedulerPolicy {
public:
  std::vector<Demand> plan_cycle(const SimView& view, const CycleInfo& cycle,
                                 const std::vector<SchedulingRequest>&) override {
    if (machine_ues_.empty()) machine_ues_ = ues_by_machine(*view.topo);
    DemandBuilder builder(view, cycle);
    const auto& frame = *view.frame;
    const auto& schedule = *view.schedule;
    const std::int64_t first_slot = cycle.start_su / frame.period_su;
    for (int k = 0; k < frame.n_on; ++k) {
      const std::int64_t slot = first_slot + k;
      if (slot >= schedule.n_slots) break;
      const std::int64_t slot_start_su = schedule.slot_start_su(slot);
      if (slot_start_su >= cycle.end_su) break;
      const double slot_start_sym = static_cast<double>(slot_start_su * kSymbolsPerSu);
      const double window_sym = static_cast<double>(frame.window_su * kSymbolsPerSu);
      const int idx = schedule.active_index(slot);
      for (const auto& line : view.topo->lines) {
        const int machine_id = line[static_cast<std::size_t>(idx)];
        for (int ue_id : machine_ues_[static_cast<std::size_t>(machine_id)]) {
          builder.add_ue_window(ue_id, slot_start_sym, window_sym);
        }
      }
    }
    return builder.take();
  }

private:
  std::vector<std::vector<int>> machine_ues_;
};

/// Adaptive: same planning as SSPS but driven by estimated activation
/// parameters, refined from grant-usage observations.
class AspsPolicy : public SchedulerPolicy {
public:
  std::vector<Demand> plan_cycle(const SimView& view, const CycleInfo& cycle,
                                 const std::vector<SchedulingRequest>& requests) override {
    if (machine_ues_.empty()) machine_ues_ = ues_by_machine(*view.topo);
    const int mpl = view.cfg->machines_per_line;

    update_estimates(view, cycle, requests);

    // Rotation anchor: machine index observed on the requesters, carried
    // forward when nobody requests.
    std::optional<int> observed = requester_index(view, requests);
    int anchor = observed.value_or((last_anchor_ + last_n_pred_) % mpl);

    DemandBuilder builder(view, cycle);
    const double cycle_start_sym = static_cast<double>(cycle.start_su * kSymbolsPerSu);
    const double cycle_len_sym =
        static_cast<double>((cycle.end_su - cycle.start_su) * kSymbolsPerSu);
    int n_pred = 0;
    for (int k = 0; k < est_.n_on_hat; ++k) {
      const double start_rel = k * est_.tau_on_hat_sym;
      if (start_rel >= cycle_len_sym - 1e-9) break;
      const double window = std::min(est_.window_hat_sym(), cycle_len_sym - start_rel);
      if (window < kSymbolsPerSu) break;
      const int idx = (anchor + k) % mpl;
      for (const auto& line : view.topo->lines) {
        const int machine_id = line[static_cast<std::size_t>(idx)];
        for (int ue_id : machine_ues_[static_cast<std::size_t>(machine_id)]) {
          builder.add_ue_window(ue_id, cycle_start_sym + start_rel, window);
        }
      }
      ++n_pred;
    }
    last_anchor_ = anchor;
    last_n_pred_ = std::max(n_pred, 1);
    return builder.take();
  }

  void observe_cycle(const CycleObservation& obs) override { pending_obs_ = obs; }

  const AspsEstimatorState* estimator() const override { return &est_; }

private:
  std::optional<int> requester_index(const SimView& view,
                                     const std::vector<SchedulingRequest>& requests) const {
    std::optional<int> idx;
    for (const auto& r : requests) {
      const auto& ue = view.topo->ues[static_cast<std::size_t>(r.ue_id)];
      int i = view.topo->machines[static_cast<std::size_t>(ue.machine_id)].index_in_line;
      if (!idx || i > *idx) idx = i;
    }
    return idx;
  }

  // Estimation timeline (n_e counts cycles, 1-based):
  //   n_e=1  runs on the initial estimates.
  //   n_e=2  opens with the activation-index recovery (its PUCCH reveals the
  //          requesters), runs on the old period estimate while unused-grant
  //          SUs are tracked; the period update lands when the cycle ends.
  //   n_e=3  runs on the updated period; its observations either confirm the
  //          estimate (same first unused SU) or trigger the used-SU gap scan.
  // Scheduling is error-free from the fourth cycle at the earliest, matching
  // a training phase of at least three inter-PUCCH intervals.
  void update_estimates(const SimView& view, const CycleInfo& cycle,
                        const std::vector<SchedulingRequest>& requests) {
    const auto& frame = *view.frame;
    const double t_ip_sym = static_cast<double>(frame.cycle_su * kSymbolsPerSu);
    const std::int64_t t_ip_su = frame.cycle_su;
    const int n_lines = view.cfg->n_lines;
    const int mpl = view.cfg->machines_per_line;

    if (cycle.index == 0) {
      est_.n_e = 1;
      est_.tau_on_hat_sym = t_ip_sym / static_cast<double>(n_lines);
      est_.n_on_hat = n_lines;
      return;
    }
    if (est_.trained) return;

    CycleObservation obs = pending_obs_.value_or(CycleObservation{});
    est_.su_tx = obs.su_tx_rel;
    est_.su_notx = obs.su_notx_rel;

    if (est_.n_e == 1) {
      // Entering the second cycle: recover the requesters' activation index
      // within the previous cycle from the positions this scheduler itself
      // predicted for them, and classify the period parity.
      std::optional<int> idx = requester_index(view, requests);
      if (idx) {
        for (int q = last_n_pred_ - 1; q >= 0; --q) {
          if ((last_anchor_ + q) % mpl == *idx) {
            const int k = q + 1;
            est_.n_on_hat = std::max(1, n_lines + k - 1);
            break;
          }
        }
      }
      const double ratio_su = static_cast<double>(t_ip_su) / est_.n_on_hat;
      const auto rounded = static_cast<std::int64_t>(std::llround(ratio_su));
      est_.parity_even =
          std::abs(ratio_su - static_cast<double>(rounded)) < 1e-9 && (rounded % 2 == 0);
      est_.n_e = 2;
      return;
    }
    if (est_.n_e == 2) {
      // The n_e=2 cycle has completed; fold its unused-grant observations
      // into the period estimate.
      if (obs.su_notx_rel.empty()) return;  // nothing to learn from; extend training
      const double t_notx0 = static_cast<double>(obs.su_notx_rel.front() * kSymbolsPerSu);
      est_.tau_on_hat_sym =
          est_.parity_even.value_or(false)
              ? t_notx0 + (2 - 1) * static_cast<double>(frame.symbols_per_su)
              : t_notx0;
      first_notx_su_ = obs.su_notx_rel.front();
      est_.n_e = 3;
      return;
    }
    if (est_.n_e == 3) {
      // The n_e=3 cycle has completed; confirm or rescan.
      if (obs.su_tx_rel.empty()) return;  // degenerate cycle; extend training
      if (!obs.su_notx_rel.empty() && first_notx_su_ >= 0 &&
          obs.su_notx_rel.front() == first_notx_su_) {
        est_.tau_on_hat_sym = static_cast<double>(obs.su_notx_rel.front() * kSymbolsPerSu) +
                              (3 - 1) * static_cast<double>(frame.symbols_per_su);
      } else {
        for (std::size_t i = 1; i < obs.su_tx_rel.size(); ++i) {
          const double delta =
              static_cast<double>((obs.su_tx_rel[i] - obs.su_tx_rel[i - 1]) * kSymbolsPerSu);
          if (delta > est_.tau_on_hat_sym) {
            const double t_prev = static_cast<double>(obs.su_tx_rel[i - 1] * kSymbolsPerSu);
            est_.tau_on_hat_sym =
                (est_.tau_on_hat_sym + t_prev) / 2.0 + (3 - 1) * frame.symbols_per_su;
          }
        }
      }
      est_.n_e = 4;
      est_.trained = true;
      return;
    }
  }

  AspsEstimatorState est_;
  std::optional<CycleObservation> pending_obs_;
  std::vector<std::vector<int>> machine_ues_;
  int last_anchor_ = 0;
  int last_n_pred_ = 1;
  std::int64_t first_notx_su_ = -1;
};

}  // namespace

std::unique_ptr<SchedulerPolicy> make_policy(SchedulerKind kind) {
  switch (kind) {
    case SchedulerKind::bsps: return std::make_unique<BspsPolicy>();
    case SchedulerKind::ssps: return std::make_unique<SspsPolicy>();
    case SchedulerKind::asps: return std::make_unique<AspsPolicy>();
  }
  throw SimError("unknown scheduler kind");
}

std::vector<std::int64_t> apply_dropping(std::vector<std::deque<std::int64_t>>& queues,
                                         std::vector<DataBlock>& blocks, std::int64_t now_sym,
                                         bool enabled) {
  std::vector<std::int64_t> dropped;
  if (!enabled) return dropped;
  for (auto& q : queues) {
    while (!q.empty()) {
      DataBlock& b = blocks[static_cast<std::size_t>(q.front())];
      if (now_sym < b.deadline_sym) break;  // generation order makes deadlines monotone
      b.state = BlockState::dropped;
      dropped.push_back(b.id);
      q.pop_front();
    }
  }
  return dropped;
}

}  // namespace nrsim
