#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ltd3/agent/rollout.hpp"
#include "ltd3/harness/run_config.hpp"
#include "ltd3/harness/train_run.hpp"

namespace ltd3 {

struct FewShotEpisode {
  std::size_t episode = 0;
  std::string phase;  // "candidate" or "final"
  std::size_t candidate = 0;
  Latent z;
  double ret = 0.0;
};

struct FewShotResult {
  Latent best_z;
  std::size_t best_candidate = 0;
  double adapted_mean = 0.0;
  double adapted_std = 0.0;
  std::vector<FewShotEpisode> log;
};

/// Test-environment handle that refuses episodes beyond its budget.
class BudgetedEnv {
 public:
  BudgetedEnv(const Environment& env, std::size_t budget) : env_(env), budget_(budget) {}

  EpisodeResult episode(const Policy& p, Rng& rng) {
    if (used_ >= budget_) throw StateError("few-shot episode budget exhausted");
    ++used_;
    return run_episode(env_, p, rng);
  }
  std::size_t used() const { return used_; }

 private:
  const Environment& env_;
  std::size_t budget_;
  std::size_t used_ = 0;
};

/// Candidate latents: classes enumerated (cyclically) for a purely discrete
/// latent, otherwise k draws from the prior.
inline std::vector<Latent> fewshot_candidates(const LatentSpec& spec, std::size_t k, Rng& rng) {
  std::vector<Latent> out;
  out.reserve(k);
  const bool enumerate = spec.cont_dim == 0 && spec.has_disc();
  for (std::size_t i = 0; i < k; ++i) {
    if (enumerate) {
      Latent z;
      z.disc = i % spec.disc_k;
      out.push_back(z);
    } else {
      out.push_back(sample_latent(spec, rng));
    }
  }
  return out;
}

/// Spend `budget` deterministic episodes on the test env, one per candidate
/// latent, keep the first best, then report `final_eval_episodes` more.
inline FewShotResult fewshot_adapt(const AgentNets& nets, const FewShotConfig& fs, const Environment& test_env,
                                   Rng& rng) {
  fs.validate(nets.latent);
  BudgetedEnv env(test_env, fs.budget + fs.final_eval_episodes);
  FewShotResult r;
  const std::vector<Latent> cands = fewshot_candidates(nets.latent, fs.budget, rng);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const double ret = env.episode(deterministic_policy(nets, cands[i]), rng).ret;
    r.log.push_back({env.used(), "candidate", i, cands[i], ret});
    if (ret > best) {
      best = ret;
      r.best_candidate = i;
    }
  }
  r.best_z = cands[r.best_candidate];
  std::vector<double> finals;
  const Policy p = deterministic_policy(nets, r.best_z);
  for (std::size_t e = 0; e < fs.final_eval_episodes; ++e) {
    finals.push_back(env.episode(p, rng).ret);
    r.log.push_back({env.used(), "final", r.best_candidate, r.best_z, finals.back()});
  }
  const ReturnStats s = return_stats(finals);
  r.adapted_mean = s.mean;
  r.adapted_std = s.std;
  return r;
}

inline std::string latent_text(const Latent& z) {
  std::string s;
  for (double c : z.cont) s += (s.empty() ? "" : " ") + format_full(c);
  if (z.disc) s += (s.empty() ? "k" : " k") + std::to_string(*z.disc);
  return s;
}

inline constexpr const char* kFewShotLogHeader = "episode,phase,candidate,z,return";

inline void write_fewshot_log(const std::filesystem::path& p, const FewShotResult& r) {
  std::ofstream os(p, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write '" + p.string() + "'");
  os << kFewShotLogHeader << "\n";
  for (const auto& e : r.log)
    os << e.episode << "," << e.phase << "," << e.candidate << "," << latent_text(e.z) << ","
       << format_full(e.ret) << "\n";
}

/// Number of episode rows in a few-shot log file.
inline std::size_t count_fewshot_log_episodes(const std::filesystem::path& p) {
  std::ifstream is(p);
  if (!is) throw std::runtime_error("cannot read '" + p.string() + "'");
  std::string line;
  std::getline(is, line);
  if (line != kFewShotLogHeader) throw InputError("unexpected few-shot log header in '" + p.string() + "'");
  std::size_t n = 0;
  while (std::getline(is, line))
    if (!line.empty()) ++n;
  return n;
}

/// Load a checkpoint of `cfg`'s run and adapt it to the configured test
/// variant. The RNG is derived from the run seed.
inline FewShotResult fewshot_from_checkpoint(const RunConfig& cfg, const std::filesystem::path& ckpt,
                                             bool force = false) {
  const auto l = load_learner(cfg, ckpt, force);
  const Environment test_env = make_environment(cfg, cfg.fewshot.test_variant);
  Rng rng = make_stream(cfg.seed, "fewshot");
  return fewshot_adapt(l->nets(), cfg.fewshot, test_env, rng);
}

}  // namespace ltd3
