#pragma once

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "ltd3/agent/config.hpp"
#include "ltd3/agent/latent.hpp"
#include "ltd3/agent/losses.hpp"
#include "ltd3/agent/nets.hpp"
#include "ltd3/envs/environment.hpp"
#include "ltd3/numerics/adam.hpp"
#include "ltd3/replay/replay_buffer.hpp"

namespace ltd3 {

/// a = clip_box(mu(s, z) + eps), eps ~ N(0, explore_sigma^2 I). Zero sigma
/// gives the deterministic evaluation policy and draws no noise.
inline Matrix act(const AgentNets& nets, const Matrix& s, const Matrix& z_enc,
                  double explore_sigma, Rng& rng) {
  Matrix a = nets.policy(s, z_enc);
  if (explore_sigma > 0.0) {
    std::normal_distribution<double> n(0.0, explore_sigma);
    for (Eigen::Index k = 0; k < a.size(); ++k) a.data()[k] += n(rng);
  }
  return nets.clip_to_box(std::move(a));
}

/// Intrinsic reward beta * log q(z | s) (DIAYN-S, SMERL) or
/// beta * log q(z | s, a) (DIAYN-SA), with the posterior's own input mode.
inline double unsupervised_reward(const AgentNets& nets, const std::vector<double>& s,
                                  const std::vector<double>& a, const Latent& z, double beta) {
  if (beta == 0.0) return 0.0;
  std::vector<std::size_t> d;
  if (z.disc) d.push_back(*z.disc);
  const Matrix zc = nets.latent.cont_dim > 0 ? row_from(z.cont) : Matrix(1, 0);
  return beta * posterior_log_q(nets, row_from(s), row_from(a), zc, d)(0);
}

/// 1 iff the episode's task return is within eps of the optimal return.
inline int smerl_gate(double episode_return, double r_star, double eps) {
  return episode_return > r_star - eps ? 1 : 0;
}

struct UpdateCounters {
  std::size_t env_steps = 0;
  std::size_t critic = 0;
  std::size_t actor_q = 0;
  std::size_t info = 0;
  std::size_t posterior = 0;
  std::size_t episodes = 0;
  std::size_t gated_in = 0;
};

struct StepDiagnostics {
  std::size_t t = 0;
  double reward = 0.0;
  bool episode_end = false;
  double episode_return = 0.0;  // task return, valid when episode_end
  bool critic_updated = false;
  bool actor_updated = false;
  bool info_updated = false;
  double critic_loss = 0.0;
  double j_q = 0.0;
  double j_info = 0.0;
  int gate = -1;  // SMERL indicator for the finished episode, -1 otherwise
};

/// Latent-conditioned TD3 learner with its replay buffer, optimizers and RNG
/// streams. One `train_step` = one environment step plus the scheduled
/// gradient updates.
class Learner {
 public:
  Learner(Environment env, LatentSpec latent, Ltd3Config cfg, std::uint64_t seed)
      : env_(std::move(env)),
        cfg_(cfg),
        rng_(seed),
        nets_(AgentNets::create(env_.spec(), latent, NetArch::from(cfg), posterior_input_for(cfg.mode),
                                rng_.init)),
        buffer_(BufferDims{env_.spec().state_dim, env_.spec().action_dim, latent.cont_dim,
                           latent.has_disc()},
                cfg.buffer_capacity) {
    cfg_.validate();
    const AdamConfig ac{cfg.lr};
    actor_opt_ = AdamState(std::span<Matrix* const>(nets_.actor.tensors()), ac);
    critic1_opt_ = AdamState(std::span<Matrix* const>(nets_.critic1.tensors()), ac);
    critic2_opt_ = AdamState(std::span<Matrix* const>(nets_.critic2.tensors()), ac);
    posterior_opt_ = AdamState(std::span<Matrix* const>(nets_.posterior.tensors()), ac);
  }

  StepDiagnostics train_step() {
    StepDiagnostics d;
    d.t = t_;
    if (!episode_active_) begin_episode();

    std::vector<double> a;
    if (t_ < cfg_.warmup_steps) {
      a.resize(nets_.action_dim);
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double c = nets_.action_center(0, static_cast<Eigen::Index>(i));
        const double h = nets_.action_half(0, static_cast<Eigen::Index>(i));
        std::uniform_real_distribution<double> u(c - h, c + h);
        a[i] = u(rng_.explore);
      }
    } else {
      a = to_std(act(nets_, row_from(state_.observation), z_enc_, cfg_.explore_sigma, rng_.explore));
    }

    StepResult res = env_.step(state_, a);
    d.reward = res.reward;
    episode_return_ += res.reward;

    Transition tr{state_.observation, a, res.next.observation, res.reward, res.done, z_.cont, z_.disc};
    switch (cfg_.mode) {
      case BaselineMode::Td3DiaynS:
      case BaselineMode::Td3DiaynSA:
        tr.r += unsupervised_reward(nets_, tr.s, tr.a, z_, cfg_.beta_intrinsic);
        buffer_.push(tr);
        break;
      case BaselineMode::SmerlGate:
        pending_.push_back(std::move(tr));
        break;
      default:
        buffer_.push(tr);
    }

    state_ = std::move(res.next);
    if (state_.terminated) {
      d.episode_end = true;
      d.episode_return = episode_return_;
      if (cfg_.mode == BaselineMode::SmerlGate) d.gate = flush_gated_episode();
      ++counters_.episodes;
      episode_active_ = false;
    }

    if (t_ >= cfg_.warmup_steps && buffer_.size() >= cfg_.batch) {
      const Batch b = buffer_.sample_uniform(cfg_.batch, rng_.batch);
      const Matrix z = encode_latents(nets_.latent, b.z_cont, b.z_disc);
      d.critic_loss = critic_update(b, z);
      d.critic_updated = true;
      if (t_ % cfg_.d_atr == 0) {
        d.j_q = actor_q_update(b, z);
        d.actor_updated = true;
      }
      if (cfg_.mode == BaselineMode::Ltd3 && cfg_.alpha_info != 0.0 && t_ % cfg_.d_info == 0) {
        d.j_info = info_update(buffer_.sample_uniform(cfg_.batch, rng_.info_batch));
        d.info_updated = true;
      }
      if (cfg_.mode == BaselineMode::Td3DiaynS || cfg_.mode == BaselineMode::Td3DiaynSA ||
          cfg_.mode == BaselineMode::SmerlGate) {
        posterior_update(buffer_.sample_uniform(cfg_.batch, rng_.info_batch));
      }
    }
    ++t_;
    counters_.env_steps = t_;
    return d;
  }

  /// One Adam step per critic on the MSE to targets from the frozen target nets.
  double critic_update(const Batch& b, const Matrix& z) {
    const Vector y = compute_target(nets_, b, z, cfg_.gamma, cfg_.target_sigma,
                                    cfg_.target_noise_clip, rng_.target_noise);
    const ObjectiveValue l1 = critic_loss(nets_.critic1, b, z, y);
    const ObjectiveValue l2 = critic_loss(nets_.critic2, b, z, y);
    adam_step(critic1_opt_, nets_.critic1.tensors(), l1.grads, false);
    adam_step(critic2_opt_, nets_.critic2.tensors(), l2.grads, false);
    ++counters_.critic;
    return 0.5 * (l1.value + l2.value);
  }

  /// Ascent on J_Q followed by Polyak updates of every target network.
  double actor_q_update(const Batch& b, const Matrix& z) {
    const ObjectiveValue j = actor_q_objective(nets_, b, z);
    adam_step(actor_opt_, nets_.actor.tensors(), j.grads, true);
    polyak_update(nets_.actor_target, nets_.actor, cfg_.tau);
    polyak_update(nets_.critic1_target, nets_.critic1, cfg_.tau);
    polyak_update(nets_.critic2_target, nets_.critic2, cfg_.tau);
    ++counters_.actor_q;
    return j.value;
  }

  /// Joint ascent of actor and posterior on the truncated-importance-weighted
  /// log-likelihood.
  double info_update(const Batch& b) {
    const Matrix z = encode_latents(nets_.latent, b.z_cont, b.z_disc);
    return info_update_with_weights(b, z, info_weights(nets_, b, z, cfg_.c_clip));
  }

  double info_update_with_weights(const Batch& b, const Matrix& z, const Vector& w) {
    const InfoObjective j = info_objective(nets_, b, z, w, cfg_.alpha_info);
    adam_step(actor_opt_, nets_.actor.tensors(), j.actor, true);
    adam_step(posterior_opt_, nets_.posterior.tensors(), j.posterior, true);
    ++counters_.info;
    return j.value;
  }

  /// Maximum-likelihood step for the baselines' discriminator.
  double posterior_update(const Batch& b) {
    const ObjectiveValue j = posterior_ml_objective(nets_, b);
    adam_step(posterior_opt_, nets_.posterior.tensors(), j.grads, true);
    ++counters_.posterior;
    return j.value;
  }

  const AgentNets& nets() const { return nets_; }
  AgentNets& nets() { return nets_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const Ltd3Config& config() const { return cfg_; }
  const Environment& env() const { return env_; }
  const UpdateCounters& counters() const { return counters_; }
  RngStreams& rng() { return rng_; }
  std::size_t step() const { return t_; }
  void set_step(std::size_t t) { t_ = t; }

  AdamState& actor_opt() { return actor_opt_; }
  AdamState& critic1_opt() { return critic1_opt_; }
  AdamState& critic2_opt() { return critic2_opt_; }
  AdamState& posterior_opt() { return posterior_opt_; }

  /// SMERL's optimal-return reference: configured value, else the env oracle.
  double r_star() const {
    if (!std::isnan(cfg_.r_star)) return cfg_.r_star;
    if (const PointVel* pv = env_.point_vel()) return pointvel_scripted_return(pv->config());
    throw ConfigError("smerl_gate mode needs r_star for this environment", "r_star");
  }

 private:
  void begin_episode() {
    z_ = sample_latent(nets_.latent, rng_.latent);
    z_enc_ = encode_latent(nets_.latent, z_);
    state_ = env_.reset(rng_.env);
    episode_return_ = 0.0;
    episode_active_ = true;
  }

  int flush_gated_episode() {
    const int gate = smerl_gate(episode_return_, r_star_cached(), cfg_.eps_smerl);
    for (Transition& tr : pending_) {
      if (gate) tr.r += unsupervised_reward(nets_, tr.s, tr.a, z_, cfg_.beta_intrinsic);
      buffer_.push(tr);
    }
    pending_.clear();
    counters_.gated_in += static_cast<std::size_t>(gate);
    return gate;
  }

  double r_star_cached() {
    if (std::isnan(r_star_value_)) r_star_value_ = r_star();
    return r_star_value_;
  }

  Environment env_;
  Ltd3Config cfg_;
  RngStreams rng_;
  AgentNets nets_;
  ReplayBuffer buffer_;
  AdamState actor_opt_, critic1_opt_, critic2_opt_, posterior_opt_;
  UpdateCounters counters_;

  std::size_t t_ = 0;
  bool episode_active_ = false;
  Latent z_;
  Matrix z_enc_;
  EnvState state_;
  double episode_return_ = 0.0;
  std::vector<Transition> pending_;
  double r_star_value_ = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace ltd3
