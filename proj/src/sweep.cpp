// SPDX-License-Identifier: Apache-2.0

#include "nrsim/sweep.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "nrsim/error.hpp"

namespace nrsim {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

std::string canonical_axis_key(const std::string& key) {
  if (key == "N") return "num_ues";
  if (key == "G") return "offered_traffic_bps";
  if (key == "B") return "bandwidth_hz";
  if (key == "t_min") return "aperiodic_tmin_s";
  if (key == "t_max") return "aperiodic_tmax_s";
  if (key == "use_case") return "preset";
  if (key == "tau_on") return "tau_on_s";
  return key;
}

SweepSpec load_sweep_text(const std::string& text, const std::string& source,
                          const std::string& base_dir) {
  SweepSpec spec;
  std::vector<std::pair<std::string, std::string>> base_sets;

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    const std::string where = source + ":" + std::to_string(line_no);
    std::size_t eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key=value");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (key == "base") {
      std::filesystem::path p(value);
      if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
      spec.base = load_config_file(p.string());
    } else if (key == "replicas") {
      spec.replicas = std::stoi(value);
      if (spec.replicas < 1) throw ConfigError(where + ": replicas must be >= 1");
    } else if (key == "base_seed") {
      spec.base_seed = std::stoull(value);
    } else if (key == "max_points") {
      spec.max_points = std::stoull(value);
    } else if (key.rfind("axis.", 0) == 0) {
      std::string axis_key = canonical_axis_key(key.substr(5));
      auto values = split_csv(value);
      if (values.empty()) throw ConfigError(where + ": axis with no values");
      spec.axes.emplace_back(axis_key, values);
    } else if (key.rfind("set.", 0) == 0) {
      base_sets.emplace_back(key.substr(4), value);
    } else {
      throw ConfigError(where + ": unknown sweep key '" + key + "'");
    }
  }
  // without a base file, defaults plus set.* assignments form the base point
  for (const auto& [k, v] : base_sets) {
    if (k == "preset") {
      const UseCasePreset* p = find_preset(v);
      if (!p) throw ConfigError(source + ": unknown preset '" + v + "'");
      ScenarioConfig tmp = spec.base;
      std::string doc = emit_config(tmp) + "preset=" + v + "\n";
      spec.base = load_config_text(doc, source);
    } else {
      apply_config_key(spec.base, k, v, source);
    }
  }
  validate(spec.base);

  std::size_t points = 1;
  for (const auto& [k, vs] : spec.axes) points *= vs.size();
  if (points > spec.max_points) {
    throw ValidationError("sweep grid has " + std::to_string(points) +
                          " points, above the cap of " + std::to_string(spec.max_points));
  }
  return spec;
}

SweepSpec load_sweep_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("sweep spec not found: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return load_sweep_text(ss.str(), path,
                         std::filesystem::path(path).parent_path().string());
}

namespace {

ScenarioConfig config_for_point(const SweepSpec& spec, std::size_t point) {
  ScenarioConfig cfg = spec.base;
  std::size_t rest = point;
  ConfigOverrides overrides;
  // point-major order: the first axis varies slowest
  std::vector<std::string> chosen(spec.axes.size());
  for (std::size_t a = spec.axes.size(); a-- > 0;) {
    const auto& values = spec.axes[a].second;
    chosen[a] = values[rest % values.size()];
    rest /= values.size();
  }
  for (std::size_t a = 0; a < spec.axes.size(); ++a) {
    overrides.emplace_back(spec.axes[a].first, chosen[a]);
  }
  std::string doc = emit_config(cfg);
  return load_config_text(doc, "sweep-point", overrides);
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec, int jobs) {
  std::size_t points = 1;
  for (const auto& [k, vs] : spec.axes) points *= vs.size();
  const std::size_t total = points * static_cast<std::size_t>(spec.replicas);

  std::vector<SweepRow> rows(total);
  for (std::size_t p = 0; p < points; ++p) {
    for (int r = 0; r < spec.replicas; ++r) {
      SweepRow& row = rows[p * spec.replicas + r];
      row.point = p;
      row.replica = r;
    }
  }

  auto work = [&](std::size_t i) {
    SweepRow& row = rows[i];
    try {
      ScenarioConfig cfg = config_for_point(spec, row.point);
      cfg.rng_seed = spec.base_seed + static_cast<std::uint64_t>(row.replica);
      row.cfg = cfg;
      row.metrics = run(cfg);
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
  };

  if (jobs <= 1) {
    for (std::size_t i = 0; i < total; ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int n_threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), total);
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) {
      pool.emplace_back([&]() {
        for (;;) {
          std::size_t i = next.fetch_add(1);
          if (i >= total) return;
          work(i);
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  return rows;
}

std::string sweep_csv_header() {
  return "scheduler,use_case,N,B_MHz,G_Mbps,n_on,tau_on_ms,t_min_ms,traffic_mix,dropping,seed,"
         "mean_e2e_ms,p99_e2e_ms,loss_ratio,delivered,dropped\n";
}

namespace {
std::string csv_num(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}
}  // namespace

std::string sweep_csv_row(const SweepRow& row) {
  if (row.failed) {
    return std::string("error,\"") + row.error + "\",,,,,,,,,,,,,,\n";
  }
  const ScenarioConfig& c = row.cfg;
  const RunMetrics& m = row.metrics;
  std::ostringstream out;
  out << to_string(c.scheduler_kind) << ',' << (c.preset_name ? *c.preset_name : "custom") << ','
      << c.num_ues << ',' << csv_num(c.bandwidth_hz / 1e6) << ','
      << csv_num(c.offered_traffic_bps / 1e6) << ',' << c.n_on << ','
      << csv_num(c.tau_on_s * 1e3) << ',' << csv_num(c.aperiodic_tmin_s * 1e3) << ','
      << csv_num(c.traffic_mix) << ',' << (c.dropping_enabled ? 1 : 0) << ',' << m.seed << ','
      << csv_num(m.mean_e2e_s * 1e3) << ',' << csv_num(m.p99_e2e_s * 1e3) << ','
      << csv_num(m.loss_ratio) << ',' << m.delivered << ',' << m.dropped << "\n";
  return out.str();
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = sweep_csv_header();
  for (const auto& r : rows) out += sweep_csv_row(r);
  return out;
}

}  // namespace nrsim
