#pragma once

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "ltd3/agent/checkpoint.hpp"
#include "ltd3/agent/learner.hpp"
#include "ltd3/agent/rollout.hpp"
#include "ltd3/harness/run_config.hpp"
#include "ltd3/metrics/diversity.hpp"
#include "ltd3/metrics/mi_bound.hpp"

namespace ltd3 {

inline constexpr const char* kMetricsHeader =
    "step,ret_mean,ret_std,mi_bound,diversity,critic_loss,j_q,j_info,gate_frac";

struct MetricsRow {
  std::size_t step = 0;
  double ret_mean = 0.0;
  double ret_std = 0.0;
  double mi_bound = 0.0;
  double diversity = 0.0;
  double critic_loss = 0.0;
  double j_q = 0.0;
  double j_info = 0.0;
  double gate_frac = 0.0;
};

inline std::string to_csv(const MetricsRow& r) {
  return std::to_string(r.step) + "," + format_full(r.ret_mean) + "," + format_full(r.ret_std) + "," +
         format_full(r.mi_bound) + "," + format_full(r.diversity) + "," + format_full(r.critic_loss) + "," +
         format_full(r.j_q) + "," + format_full(r.j_info) + "," + format_full(r.gate_frac);
}

struct ReturnStats {
  double mean = 0.0;
  double std = 0.0;  // population
};

inline ReturnStats return_stats(const std::vector<double>& xs) {
  ReturnStats s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  for (double x : xs) s.std += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(s.std / static_cast<double>(xs.size()));
  return s;
}

/// Deterministic returns over `episodes` episodes, each with a fresh latent.
inline std::vector<double> eval_returns(const AgentNets& nets, const Environment& env,
                                        std::size_t episodes, Rng& rng) {
  std::vector<double> out;
  out.reserve(episodes);
  for (std::size_t e = 0; e < episodes; ++e) {
    const Latent z = sample_latent(nets.latent, rng);
    out.push_back(run_episode(env, deterministic_policy(nets, z), rng).ret);
  }
  return out;
}

/// Behavior embeddings of `m` policies with latents drawn from the prior.
inline std::vector<BehaviorEmbedding> latent_embeddings(const AgentNets& nets, const Environment& env,
                                                        std::size_t m, std::size_t episodes, Rng& rng) {
  std::vector<BehaviorEmbedding> em;
  em.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Latent z = sample_latent(nets.latent, rng);
    em.push_back(behavior_embedding(deterministic_policy(nets, z), env, episodes, rng, "z" + std::to_string(i)));
  }
  return em;
}

/// MI lower bound on the most recent buffer rows, with actions regenerated
/// by the current deterministic policy so that the bound measures mu(s, z)
/// rather than exploration noise.
inline double recent_mi_bound(const AgentNets& nets, const ReplayBuffer& buf, std::size_t n) {
  if (buf.size() == 0) return std::nan("");
  Batch b = buf.recent(n);
  b.a = nets.policy(b.s, encode_latents(nets.latent, b.z_cont, b.z_disc));
  return mi_lower_bound(b, nets);
}

inline bool nets_finite(AgentNets& n) {
  for (const auto& t : detail::checkpoint_networks(n))
    for (const Matrix* m : t.tensors)
      if (!all_finite(*m)) return false;
  return true;
}

struct RunResult {
  std::vector<MetricsRow> rows;
  std::vector<std::filesystem::path> checkpoints;
  std::filesystem::path metrics_path;
  std::filesystem::path manifest_path;
  std::uint64_t config_hash = 0;
  std::unique_ptr<Learner> learner;
};

inline std::filesystem::path checkpoint_path(const std::filesystem::path& dir, std::size_t step) {
  char name[32];
  std::snprintf(name, sizeof(name), "ckpt_%09zu.bin", step);
  return dir / name;
}

inline void write_checkpoint_file(const std::filesystem::path& p, Learner& l, std::uint64_t hash) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write checkpoint '" + p.string() + "'");
  save_checkpoint(os, l, hash);
}

inline std::unique_ptr<Learner> make_learner(const RunConfig& cfg) {
  return std::make_unique<Learner>(make_train_environment(cfg), cfg.latent, cfg.agent, cfg.seed);
}

/// Rebuild the run's learner and restore parameters from a checkpoint.
inline std::unique_ptr<Learner> load_learner(const RunConfig& cfg, const std::filesystem::path& ckpt,
                                             bool force = false) {
  auto l = make_learner(cfg);
  std::ifstream is(ckpt, std::ios::binary);
  if (!is) throw ConfigError("cannot open checkpoint '" + ckpt.string() + "'", ckpt.string());
  load_checkpoint(is, *l, config_hash(cfg), force);
  return l;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline nlohmann::ordered_json config_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  RunConfig copy = cfg;
  for (const auto& f : config_schema()) j[f.key] = f.get(copy);
  return j;
}

using ProgressFn = std::function<void(const MetricsRow&)>;

/// Train for cfg.agent.total_steps, evaluating every eval_interval steps.
/// Writes metrics.csv, manifest.json and checkpoints under cfg.out_dir.
inline RunResult train_run(const RunConfig& cfg, const ProgressFn& progress = {}) {
  validate_config(cfg);
  namespace fs = std::filesystem;
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);

  RunResult res;
  res.config_hash = config_hash(cfg);
  res.learner = make_learner(cfg);
  Learner& l = *res.learner;
  const Environment eval_env = make_train_environment(cfg);
  Rng& eval_rng = l.rng().eval;

  res.metrics_path = dir / "metrics.csv";
  std::ofstream csv(res.metrics_path, std::ios::trunc);
  if (!csv) throw std::runtime_error("cannot write '" + res.metrics_path.string() + "'");
  csv << kMetricsHeader << "\n";
  csv.flush();

  auto checkpoint = [&](std::size_t step) {
    const fs::path p = checkpoint_path(dir, step);
    write_checkpoint_file(p, l, res.config_hash);
    res.checkpoints.push_back(p);
  };
  checkpoint(0);

  const bool smerl = cfg.agent.mode == BaselineMode::SmerlGate;
  double critic_loss = 0.0, j_q = 0.0, j_info = 0.0;
  const std::size_t total = cfg.agent.total_steps;
  for (std::size_t t = 1; t <= total; ++t) {
    const StepDiagnostics d = l.train_step();
    if (d.critic_updated) critic_loss = d.critic_loss;
    if (d.actor_updated) j_q = d.j_q;
    if (d.info_updated) j_info = d.j_info;

    if (t % cfg.eval_interval == 0 || t == total) {
      if (!nets_finite(l.nets())) throw NumericError("non-finite network parameters at step " + std::to_string(t));
      MetricsRow row;
      row.step = t;
      const ReturnStats rs = return_stats(eval_returns(l.nets(), eval_env, cfg.eval_episodes, eval_rng));
      row.ret_mean = rs.mean;
      row.ret_std = rs.std;
      row.mi_bound = recent_mi_bound(l.nets(), l.buffer(), cfg.mi_samples);
      row.diversity = diversity_score(
          latent_embeddings(l.nets(), eval_env, cfg.diversity_latents, cfg.diversity_episodes, eval_rng),
          cfg.diversity_h);
      row.critic_loss = critic_loss;
      row.j_q = j_q;
      row.j_info = j_info;
      const auto& c = l.counters();
      row.gate_frac = smerl && c.episodes > 0
                          ? static_cast<double>(c.gated_in) / static_cast<double>(c.episodes)
                          : 0.0;
      csv << to_csv(row) << "\n";
      csv.flush();
      if (!csv) throw std::runtime_error("write failed on '" + res.metrics_path.string() + "'");
      res.rows.push_back(row);
      if (progress) progress(row);
    }
    if ((cfg.checkpoint_interval > 0 && t % cfg.checkpoint_interval == 0) || t == total) checkpoint(t);
  }

  nlohmann::ordered_json m;
  m["config"] = config_json(cfg);
  m["config_hash"] = hex64(res.config_hash);
  m["created_utc"] = utc_timestamp();
  m["metrics"] = res.metrics_path.filename().string();
  std::vector<std::string> ck;
  for (const auto& p : res.checkpoints) ck.push_back(p.filename().string());
  m["checkpoints"] = ck;
  const auto& c = l.counters();
  m["counters"] = {{"env_steps", c.env_steps}, {"critic", c.critic},   {"actor_q", c.actor_q},
                   {"info", c.info},           {"posterior", c.posterior}, {"episodes", c.episodes},
                   {"gated_in", c.gated_in}};
  res.manifest_path = dir / "manifest.json";
  std::ofstream mf(res.manifest_path, std::ios::trunc);
  if (!mf) throw std::runtime_error("cannot write '" + res.manifest_path.string() + "'");
  mf << m.dump(2) << "\n";
  return res;
}

}  // namespace ltd3
