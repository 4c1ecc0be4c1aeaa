// SPDX-License-Identifier: Apache-2.0

#include "nrsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nrsim/error.hpp"

namespace nrsim {

double latency_floor_s(const ScenarioConfig& cfg) {
  return sym_to_s(cfg.t_p_symbols) + sym_to_s(cfg.t_tx_symbols) + cfg.tau_p_s + cfg.t_fh_s +
         cfg.tau_fh_s + sym_to_s(cfg.t_gnb_symbols) + cfg.t_cn_s;
}

LatencyRecord compute_latency(const DataBlock& block, std::int64_t completion_su,
                              const ScenarioConfig& cfg) {
  LatencyRecord r;
  r.block_id = block.id;
  r.ue_id = block.ue_id;
  r.t_p_s = sym_to_s(cfg.t_p_symbols);
  r.t_tx_s = sym_to_s(cfg.t_tx_symbols);
  r.tau_p_s = cfg.tau_p_s;
  r.t_fh_s = cfg.t_fh_s;
  r.tau_fh_s = cfg.tau_fh_s;
  r.t_gnb_s = sym_to_s(cfg.t_gnb_symbols);
  r.t_cn_s = cfg.t_cn_s;
  const double tx_start_s = sym_to_s(completion_su * kSymbolsPerSu);
  double t_ran = tx_start_s - (block.gen_raw_s + r.t_p_s);
  sim_check(t_ran >= -1e-12, "negative RAN delay: grant precedes block readiness");
  r.t_ran_s = t_ran < 0.0 ? 0.0 : t_ran;
  r.total_s =
      r.t_p_s + r.t_ran_s + r.t_tx_s + r.tau_p_s + r.t_fh_s + r.tau_fh_s + r.t_gnb_s + r.t_cn_s;
  return r;
}

RunMetrics aggregate(const std::vector<LatencyRecord>& records, std::int64_t dropped,
                     std::int64_t still_queued, int num_ues) {
  RunMetrics m;
  m.delivered = static_cast<std::int64_t>(records.size());
  m.dropped = dropped;
  m.still_queued = still_queued;
  m.generated = m.delivered + dropped + still_queued;
  const std::int64_t denom = m.delivered + m.dropped;
  m.loss_ratio = denom > 0 ? static_cast<double>(m.dropped) / static_cast<double>(denom) : 0.0;

  m.per_ue_mean_s.assign(static_cast<std::size_t>(num_ues),
                         std::numeric_limits<double>::quiet_NaN());
  m.per_ue_delivered.assign(static_cast<std::size_t>(num_ues), 0);
  std::vector<double> per_ue_sum(static_cast<std::size_t>(num_ues), 0.0);
  std::vector<double> totals;
  totals.reserve(records.size());
  double flat_sum = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& r : records) {
    per_ue_sum[static_cast<std::size_t>(r.ue_id)] += r.total_s;
    ++m.per_ue_delivered[static_cast<std::size_t>(r.ue_id)];
    flat_sum += r.total_s;
    totals.push_back(r.total_s);
    lo = std::min(lo, r.total_s);
    hi = std::max(hi, r.total_s);
  }
  double ue_mean_sum = 0.0;
  int ue_with_data = 0;
  for (int u = 0; u < num_ues; ++u) {
    if (m.per_ue_delivered[static_cast<std::size_t>(u)] > 0) {
      double mean = per_ue_sum[static_cast<std::size_t>(u)] /
                    static_cast<double>(m.per_ue_delivered[static_cast<std::size_t>(u)]);
      m.per_ue_mean_s[static_cast<std::size_t>(u)] = mean;
      ue_mean_sum += mean;
      ++ue_with_data;
    }
  }
  if (m.delivered > 0) {
    m.mean_e2e_s = ue_mean_sum / static_cast<double>(ue_with_data);
    m.flat_mean_e2e_s = flat_sum / static_cast<double>(m.delivered);
    std::sort(totals.begin(), totals.end());
    const auto idx = static_cast<std::size_t>(
        std::max<std::int64_t>(0, static_cast<std::int64_t>(
                                      std::ceil(0.99 * static_cast<double>(totals.size()))) -
                                      1));
    m.p99_e2e_s = totals[std::min(idx, totals.size() - 1)];
    m.min_e2e_s = lo;
    m.max_e2e_s = hi;
  } else {
    m.mean_e2e_s = std::numeric_limits<double>::quiet_NaN();
    m.flat_mean_e2e_s = std::numeric_limits<double>::quiet_NaN();
    m.p99_e2e_s = std::numeric_limits<double>::quiet_NaN();
    m.min_e2e_s = std::numeric_limits<double>::quiet_NaN();
    m.max_e2e_s = std::numeric_limits<double>::quiet_NaN();
  }
  return m;
}

RunResult run_simulation(const ScenarioConfig& cfg, const RunOptions& opts) {
  validate(cfg);
  RunResult result;

  const FrameParams frame = FrameParams::from_config(cfg);
  const Topology topo = build_topology(cfg);
  const std::vector<LinkState> links =
      build_links(cfg, topo, opts.inf_constants.value_or(default_inf_constants()));
  const ActivationSchedule schedule = build_activation_schedule(cfg, frame);
  Timeline timeline = build_timeline(cfg, topo, links, schedule, frame);

  result.topology_dump = dump_topology(topo);
  result.arrivals_csv = dump_arrivals(timeline);

  std::vector<DataBlock>& blocks = timeline.blocks;
  const auto total_su = static_cast<std::int64_t>(
      std::floor(cfg.sim_time_s / frame.su_duration_s + 1e-9));

  SimView view{&cfg, &frame, &topo, &links, &schedule, &blocks};
  auto policy = make_policy(cfg.scheduler_kind);

  std::vector<std::deque<std::int64_t>> queues(static_cast<std::size_t>(cfg.num_ues));
  std::vector<LatencyRecord> records;
  std::int64_t dropped_count = timeline.lost_at_generation;

  // Plan of the current cycle: slices bucketed per SU.
  std::vector<std::vector<GrantSlice>> su_slices;
  std::int64_t cycle_start_su = 0;
  CycleInfo cycle{};
  std::vector<char> cyc_su_used, cyc_su_granted;
  std::ostringstream grant_log;
  if (opts.keep_grant_log) grant_log << "cycle,su,ue,block,rb_start,rb_count\n";

  const double floor_s = latency_floor_s(cfg);
  std::size_t next_gen = 0;

  auto finalize_observation = [&](std::int64_t finished_cycle_index) {
    CycleObservation obs;
    obs.cycle_index = finished_cycle_index;
    // granted state per SU: 0 = no grants, 1 = all grants used, 2 = at
    // least one grant went entirely unused
    for (std::size_t i = 0; i < cyc_su_granted.size(); ++i) {
      if (!cyc_su_granted[i]) continue;
      if (cyc_su_used[i]) obs.su_tx_rel.push_back(static_cast<std::int64_t>(i));
      if (cyc_su_granted[i] == 2) obs.su_notx_rel.push_back(static_cast<std::int64_t>(i));
    }
    policy->observe_cycle(obs);
  };

  for (std::int64_t su = 0; su < total_su; ++su) {
    const std::int64_t su_sym = su_start_sym(su);

    // 1. admit this SU's generations (they become transmittable after T_P)
    while (next_gen < blocks.size() && blocks[next_gen].gen_sym < su_sym + kSymbolsPerSu) {
      DataBlock& b = blocks[next_gen];
      if (b.state != BlockState::dropped) {
        queues[static_cast<std::size_t>(b.ue_id)].push_back(b.id);
      }
      ++next_gen;
    }

    // 2. dropping policy at the SU boundary
    dropped_count += static_cast<std::int64_t>(
        apply_dropping(queues, blocks, su_sym, cfg.dropping_enabled).size());

    // 3. PUCCH boundary: collect requests, plan and pre-allocate the cycle
    if (su % frame.cycle_su == 0) {
      if (su > 0) finalize_observation(cycle.index);
      cycle.index = su / frame.cycle_su;
      cycle.start_su = su;
      cycle.end_su = std::min(su + frame.cycle_su, total_su);
      cycle_start_su = su;

      std::vector<SchedulingRequest> requests;
      const std::int64_t slot = frame.slot_of_su(su);
      if (slot < schedule.n_slots) {
        for (const auto& ue : topo.ues) {
          if (!links[static_cast<std::size_t>(ue.id)].adequate) continue;
          if (!timeline.slot_active[static_cast<std::size_t>(slot)]
                                   [static_cast<std::size_t>(ue.id)]) {
            continue;
          }
          SchedulingRequest req;
          req.ue_id = ue.id;
          for (std::int64_t id : queues[static_cast<std::size_t>(ue.id)]) {
            if (blocks[static_cast<std::size_t>(id)].gen_sym <= su_sym) {
              req.queued_block_ids.push_back(id);
            }
          }
          requests.push_back(std::move(req));
        }
      }

      std::vector<Demand> demands = policy->plan_cycle(view, cycle, requests);
      std::vector<GrantSlice> slices =
          allocate_edf_ff(demands, frame, cycle.start_su, cycle.end_su, cfg.bucket_fraction);

      su_slices.assign(static_cast<std::size_t>(cycle.end_su - cycle.start_su), {});
      for (auto& s : slices) {
        sim_check(s.su >= cycle.start_su && s.su < cycle.end_su, "slice outside its cycle");
        su_slices[static_cast<std::size_t>(s.su - cycle.start_su)].push_back(s);
      }
      cyc_su_used.assign(su_slices.size(), 0);
      cyc_su_granted.assign(su_slices.size(), 0);
      if (opts.keep_grid) {
        for (const auto& s : slices) {
          result.grid.slices.push_back(
              GridSlice{s.su, s.ue_id, s.intended_block, s.rb_start, s.rb_count});
        }
      }
      if (opts.keep_cycle_slices) result.cycle_slices.push_back(std::move(slices));
    }

    // 4. execute this SU's grants: FIFO binding onto ready blocks
    const auto su_rel = static_cast<std::size_t>(su - cycle_start_su);
    if (su_rel < su_slices.size()) {
      const bool is_guard = frame.purpose(su) == SuPurpose::guard;
      const std::int64_t guard_slot = is_guard ? frame.slot_of_su(su) : -1;
      for (const auto& slice : su_slices[su_rel]) {
        auto& q = queues[static_cast<std::size_t>(slice.ue_id)];
        int avail = slice.rb_count;
        bool used = false;
        for (auto it = q.begin(); it != q.end() && avail > 0;) {
          DataBlock& b = blocks[static_cast<std::size_t>(*it)];
          if (b.ready_sym > su_sym) break;  // FIFO: the rest are even younger
          if (is_guard && b.slot_index != guard_slot) {
            ++it;
            continue;
          }
          const int take = std::min(avail, b.remaining_rbs);
          sim_check(take > 0, "empty grant binding");
          b.remaining_rbs -= take;
          avail -= take;
          used = true;
          if (b.remaining_rbs == 0) {
            b.state = BlockState::transmitted;
            LatencyRecord rec = compute_latency(b, su, cfg);
            sim_check(rec.total_s >= floor_s - 1e-12, "latency below the constant floor");
            records.push_back(rec);
            it = q.erase(it);
          } else {
            b.state = BlockState::granted;
            break;  // grant exhausted on a partial block
          }
        }
        if (opts.keep_grant_log) {
          char buf[128];
          std::snprintf(buf, sizeof(buf), "%lld,%lld,%d,%lld,%d,%d\n",
                        static_cast<long long>(cycle.index), static_cast<long long>(su),
                        slice.ue_id, static_cast<long long>(slice.intended_block), slice.rb_start,
                        slice.rb_count);
          grant_log << buf;
        }
        cyc_su_granted[su_rel] = std::max<char>(cyc_su_granted[su_rel], used ? 1 : 2);
        if (used) cyc_su_used[su_rel] = 1;
      }
    }
  }
  finalize_observation(cycle.index);

  // Event conservation: every generated block is delivered, dropped, or
  // still queued at T_S.
  std::int64_t still_queued = 0;
  for (const auto& b : blocks) {
    if (b.state == BlockState::queued || b.state == BlockState::granted) ++still_queued;
  }
  sim_check(static_cast<std::int64_t>(records.size()) + dropped_count + still_queued ==
                static_cast<std::int64_t>(blocks.size()),
            "event conservation violated");

  result.metrics = aggregate(records, dropped_count, still_queued, cfg.num_ues);
  result.metrics.seed = cfg.rng_seed;
  if (const auto* est = policy->estimator()) result.estimator_final = *est;
  if (opts.keep_records) result.records = std::move(records);
  if (opts.keep_grant_log) result.grant_log_csv = grant_log.str();
  return result;
}

RunMetrics run(const ScenarioConfig& cfg) { return run_simulation(cfg).metrics; }

namespace {
std::string fmt_double(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

std::string serialize_metrics(const RunMetrics& m, const ScenarioConfig& cfg) {
  std::ostringstream out;
  out << "nrsim.result.v1\n";
  out << "seed=" << m.seed << "\n";
  out << "generated=" << m.generated << "\n";
  out << "delivered=" << m.delivered << "\n";
  out << "dropped=" << m.dropped << "\n";
  out << "still_queued=" << m.still_queued << "\n";
  out << "loss_ratio=" << fmt_double(m.loss_ratio) << "\n";
  out << "mean_e2e_s=" << fmt_double(m.mean_e2e_s) << "\n";
  out << "flat_mean_e2e_s=" << fmt_double(m.flat_mean_e2e_s) << "\n";
  out << "p99_e2e_s=" << fmt_double(m.p99_e2e_s) << "\n";
  out << "min_e2e_s=" << fmt_double(m.min_e2e_s) << "\n";
  out << "max_e2e_s=" << fmt_double(m.max_e2e_s) << "\n";
  out << "[config]\n";
  out << emit_config(cfg);
  return out.str();
}

std::string metrics_to_json(const RunMetrics& m, const ScenarioConfig& cfg) {
  nlohmann::json j;
  j["seed"] = m.seed;
  j["generated"] = m.generated;
  j["delivered"] = m.delivered;
  j["dropped"] = m.dropped;
  j["still_queued"] = m.still_queued;
  j["loss_ratio"] = m.loss_ratio;
  auto set_opt = [&j, &m](const char* key, double v) {
    if (m.delivered > 0) {
      j[key] = v;
    } else {
      j[key] = nullptr;
    }
  };
  set_opt("mean_e2e_s", m.mean_e2e_s);
  set_opt("flat_mean_e2e_s", m.flat_mean_e2e_s);
  set_opt("p99_e2e_s", m.p99_e2e_s);
  j["per_ue_mean_s"] = nlohmann::json::array();
  for (double v : m.per_ue_mean_s) {
    if (std::isnan(v)) {
      j["per_ue_mean_s"].push_back(nullptr);
    } else {
      j["per_ue_mean_s"].push_back(v);
    }
  }
  j["config"] = nlohmann::json::object();
  std::istringstream cfg_lines(emit_config(cfg));
  std::string line;
  while (std::getline(cfg_lines, line)) {
    auto eq = line.find('=');
    if (eq != std::string::npos) j["config"][line.substr(0, eq)] = line.substr(eq + 1);
  }
  return j.dump(2);
}

}  // namespace nrsim
