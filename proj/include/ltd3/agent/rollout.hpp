#pragma once

#include <functional>
#include <vector>

#include "ltd3/agent/latent.hpp"
#include "ltd3/agent/nets.hpp"
#include "ltd3/envs/environment.hpp"

namespace ltd3 {

/// Maps an observation to an action.
using Policy = std::function<std::vector<double>(const std::vector<double>&)>;

struct EpisodeResult {
  double ret = 0.0;
  std::size_t steps = 0;
  std::vector<double> action_sum;
};

inline EpisodeResult run_episode(const Environment& env, const Policy& policy, Rng& rng) {
  EpisodeResult r;
  r.action_sum.assign(env.spec().action_dim, 0.0);
  EnvState s = env.reset(rng);
  while (!s.terminated) {
    const std::vector<double> a = policy(s.observation);
    StepResult st = env.step(s, a);
    for (std::size_t i = 0; i < a.size(); ++i) r.action_sum[i] += a[i];
    r.ret += st.reward;
    ++r.steps;
    s = std::move(st.next);
  }
  return r;
}

/// Deterministic (noise-free) latent-conditioned policy mu(., z).
inline Policy deterministic_policy(const AgentNets& nets, const Latent& z) {
  Matrix z_enc = encode_latent(nets.latent, z);
  return [&nets, z_enc](const std::vector<double>& obs) {
    return to_std(nets.policy(row_from(obs), z_enc));
  };
}

}  // namespace ltd3
