#pragma once

#include <random>
#include <string>
#include <vector>

#include "ltd3/agent/losses.hpp"
#include "ltd3/envs/point_vel.hpp"
#include "ltd3/numerics/gradcheck.hpp"

namespace ltd3 {

struct LossCheck {
  std::string loss;
  double max_rel_error = 0.0;
};

namespace detail {

inline Matrix gauss(Eigen::Index r, Eigen::Index c, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(r, c);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = n(rng);
  return m;
}

inline Matrix uniform(Eigen::Index r, Eigen::Index c, Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(r, c);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = u(rng);
  return m;
}

inline std::vector<GradCheckBlock> blocks_for(const std::string& prefix, std::vector<Matrix*> params,
                                              const ParamGrads& grads) {
  std::vector<GradCheckBlock> out;
  for (std::size_t i = 0; i < params.size(); ++i)
    out.push_back({prefix + "[" + std::to_string(i) + "]", params[i], grads[i]});
  return out;
}

}  // namespace detail

/// Finite-difference check of the critic loss, J_Q and J_info (actor and
/// posterior blocks) on small random networks and a random batch.
inline std::vector<LossCheck> run_gradcheck_suite(std::uint64_t seed, double step = 1e-5) {
  Rng rng = make_stream(seed, "gradcheck");
  const EnvSpec spec = PointVel{}.spec();
  const LatentSpec latent{2, 3};
  NetArch arch;
  arch.hidden = 8;
  arch.embed_dim = 4;
  AgentNets nets = AgentNets::create(spec, latent, arch, PosteriorInput::StateAction, rng);

  const Eigen::Index B = 6;
  const auto sd = static_cast<Eigen::Index>(spec.state_dim);
  const auto ad = static_cast<Eigen::Index>(spec.action_dim);
  Batch b;
  b.s = detail::gauss(B, sd, rng);
  b.a = detail::uniform(B, ad, rng, -0.95, 0.95);
  b.s_next = detail::gauss(B, sd, rng);
  b.r = detail::gauss(B, 1, rng).col(0);
  b.done = Vector::Zero(B);
  b.z_cont = detail::uniform(B, 2, rng, -1.0, 1.0);
  std::uniform_int_distribution<std::size_t> k(0, latent.disc_k - 1);
  for (Eigen::Index i = 0; i < B; ++i) b.z_disc.push_back(k(rng));
  const Matrix z = encode_latents(latent, b.z_cont, b.z_disc);
  const Vector y = detail::gauss(B, 1, rng, 3.0).col(0);
  const Vector w = detail::uniform(B, 1, rng, 0.7, 1.3).col(0);

  std::vector<LossCheck> out;
  {
    auto blocks = detail::blocks_for("critic", nets.critic1.tensors(), critic_loss(nets.critic1, b, z, y).grads);
    const auto rep = check_gradients([&] { return critic_loss(nets.critic1, b, z, y).value; }, blocks, step);
    out.push_back({"L_critic", rep.max_rel_error()});
  }
  {
    auto blocks = detail::blocks_for("actor", nets.actor.tensors(), actor_q_objective(nets, b, z).grads);
    const auto rep = check_gradients([&] { return actor_q_objective(nets, b, z).value; }, blocks, step);
    out.push_back({"J_Q", rep.max_rel_error()});
  }
  {
    const InfoObjective j = info_objective(nets, b, z, w, 1.0);
    auto blocks = detail::blocks_for("actor", nets.actor.tensors(), j.actor);
    for (auto& blk : detail::blocks_for("posterior", nets.posterior.tensors(), j.posterior))
      blocks.push_back(std::move(blk));
    const auto rep = check_gradients([&] { return info_objective(nets, b, z, w, 1.0).value; }, blocks, step);
    out.push_back({"J_info", rep.max_rel_error()});
  }
  return out;
}

}  // namespace ltd3
