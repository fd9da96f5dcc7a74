#pragma once

#include <vector>

#include "ltd3/agent/losses.hpp"
#include "ltd3/envs/ring_mdp.hpp"
#include "ltd3/metrics/mi_bound.hpp"
#include "ltd3/numerics/adam.hpp"
#include "ltd3/replay/replay_buffer.hpp"

namespace ltd3 {

/// Transitions from the two ring policies: class 0 always clockwise, class 1
/// always counter-clockwise, latent drawn per episode.
inline void collect_ring_labeled(const RingMdp& ring, std::size_t n, ReplayBuffer& buf, Rng& rng) {
  std::bernoulli_distribution coin(0.5);
  std::size_t added = 0;
  while (added < n) {
    const std::size_t z = coin(rng) ? 1 : 0;
    const double a = RingMdp::encode(z == 0 ? RingAction::Cw : RingAction::Ccw);
    EnvState s = ring.reset(rng);
    while (!s.terminated && added < n) {
      StepResult r = ring.step(s, std::vector<double>{a});
      buf.push({s.observation, {a}, r.next.observation, r.reward, r.done, {}, z});
      s = std::move(r.next);
      ++added;
    }
  }
}

struct RingFitConfig {
  std::size_t steps = 20000;  // environment steps, one ML update each once a batch is available
  std::size_t batch = 64;
  std::size_t hidden = 32;
  double lr = 1e-3;
  std::size_t eval_every = 1000;
  std::size_t eval_samples = 4096;
};

struct RingFitResult {
  std::vector<std::pair<std::size_t, double>> curve;  // (step, bound on held-out data)
  double final_bound = 0.0;
};

/// Maximum-likelihood fit of the posterior on ring-labeled rollouts,
/// tracking the MI lower bound on a held-out set.
inline RingFitResult ring_posterior_fit(const RingMdp& ring, PosteriorInput input, const RingFitConfig& fc,
                                        std::uint64_t seed) {
  RngStreams rs(seed);
  const LatentSpec latent{0, 2};
  NetArch arch;
  arch.hidden = fc.hidden;
  arch.embed_dim = 4;
  AgentNets nets = AgentNets::create(ring.spec(), latent, arch, input, rs.init);
  AdamState opt(std::span<Matrix* const>(nets.posterior.tensors()), AdamConfig{fc.lr});

  const BufferDims dims{ring.spec().state_dim, 1, 0, true};
  ReplayBuffer held(dims, fc.eval_samples);
  collect_ring_labeled(ring, fc.eval_samples, held, rs.eval);
  const Batch held_all = held.recent(fc.eval_samples);

  ReplayBuffer buf(dims, fc.steps + 1);
  RingFitResult r;
  for (std::size_t t = 1; t <= fc.steps; ++t) {
    collect_ring_labeled(ring, 1, buf, rs.env);
    if (buf.size() >= fc.batch) {
      const ObjectiveValue j = posterior_ml_objective(nets, buf.sample_uniform(fc.batch, rs.batch));
      adam_step(opt, nets.posterior.tensors(), j.grads, true);
    }
    if (t % fc.eval_every == 0 || t == fc.steps) r.curve.emplace_back(t, mi_lower_bound(held_all, nets));
  }
  r.final_bound = r.curve.empty() ? mi_lower_bound(held_all, nets) : r.curve.back().second;
  return r;
}

}  // namespace ltd3
