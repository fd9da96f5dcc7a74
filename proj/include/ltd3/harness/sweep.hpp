#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "ltd3/harness/train_run.hpp"

namespace ltd3 {

struct SweepRun {
  RunConfig config;
  std::string label;
  bool ok = false;
  std::string error;
  std::vector<MetricsRow> rows;
};

struct SweepReport {
  std::vector<SweepRun> runs;
  std::size_t failures() const {
    std::size_t n = 0;
    for (const auto& r : runs) n += r.ok ? 0 : 1;
    return n;
  }
};

/// Keys (other than seed and out_dir) whose values differ across configs.
inline std::vector<std::string> sweep_axes(const std::vector<RunConfig>& configs) {
  std::vector<std::string> axes;
  if (configs.empty()) return axes;
  for (const auto& f : config_schema()) {
    if (f.key == "seed" || f.key == "out_dir") continue;
    const std::string first = get_config_value(configs.front(), f.key);
    for (const auto& c : configs)
      if (get_config_value(c, f.key) != first) {
        axes.push_back(f.key);
        break;
      }
  }
  return axes;
}

inline std::string sweep_label(const RunConfig& c, const std::vector<std::string>& axes) {
  std::string s;
  for (const auto& k : axes) s += (s.empty() ? "" : ";") + k + "=" + get_config_value(c, k);
  return s.empty() ? "base" : s;
}

inline constexpr const char* kSweepHeader =
    "label,step,n_seeds,ret_mean,ret_seed_std,mi_bound,diversity,diversity_seed_std";

/// Run every config (failures are recorded, not propagated), optionally on
/// `workers` threads, then average per-label curves across seeds.
inline SweepReport sweep(const std::vector<RunConfig>& configs, std::size_t workers = 1) {
  SweepReport rep;
  const auto axes = sweep_axes(configs);
  rep.runs.resize(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    rep.runs[i].config = configs[i];
    rep.runs[i].label = sweep_label(configs[i], axes);
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rep.runs.size(); i = next++) {
      SweepRun& r = rep.runs[i];
      try {
        r.rows = train_run(r.config).rows;
        r.ok = true;
      } catch (const std::exception& e) {
        r.error = e.what();
      }
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, rep.runs.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return rep;
}

/// Aggregate CSV: one row per (label, step) over the successful seeds.
inline std::string sweep_csv(const SweepReport& rep) {
  struct Acc {
    std::vector<double> ret, mi, div;
  };
  std::vector<std::string> order;
  std::map<std::string, std::map<std::size_t, Acc>> acc;
  for (const auto& r : rep.runs) {
    if (!r.ok) continue;
    if (!acc.count(r.label)) order.push_back(r.label);
    for (const auto& row : r.rows) {
      Acc& a = acc[r.label][row.step];
      a.ret.push_back(row.ret_mean);
      a.mi.push_back(row.mi_bound);
      a.div.push_back(row.diversity);
    }
  }
  std::string out = std::string(kSweepHeader) + "\n";
  for (const auto& label : order)
    for (const auto& [step, a] : acc[label]) {
      const ReturnStats r = return_stats(a.ret), m = return_stats(a.mi), d = return_stats(a.div);
      out += "\"" + label + "\"," + std::to_string(step) + "," + std::to_string(a.ret.size()) + "," +
             format_full(r.mean) + "," + format_full(r.std) + "," + format_full(m.mean) + "," +
             format_full(d.mean) + "," + format_full(d.std) + "\n";
    }
  return out;
}

}  // namespace ltd3
