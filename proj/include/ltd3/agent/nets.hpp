#pragma once

#include <utility>
#include <vector>

#include "ltd3/agent/config.hpp"
#include "ltd3/agent/latent.hpp"
#include "ltd3/envs/env.hpp"
#include "ltd3/numerics/density.hpp"
#include "ltd3/numerics/mlp.hpp"

namespace ltd3 {

/// Network conditioned on a latent: z passes through one fully connected
/// layer, the result is concatenated after the primary input `x` and fed to
/// the trunk MLP.
struct ConditionedNet {
  MlpParams embed;
  MlpParams trunk;
  std::size_t x_dim = 0;

  std::vector<Matrix*> tensors() {
    auto out = embed.tensors();
    for (Matrix* t : trunk.tensors()) out.push_back(t);
    return out;
  }
  std::vector<const Matrix*> tensors() const {
    auto out = embed.tensors();
    for (const Matrix* t : trunk.tensors()) out.push_back(t);
    return out;
  }

  static ConditionedNet random(std::size_t x_dim, std::size_t z_dim, std::size_t embed_dim,
                               std::size_t hidden, std::size_t hidden_layers, std::size_t out_dim,
                               Activation output, Rng& rng) {
    ConditionedNet n;
    n.x_dim = x_dim;
    n.embed = MlpParams::random({z_dim, embed_dim}, rng, Activation::Tanh);
    std::vector<std::size_t> sizes{x_dim + embed_dim};
    for (std::size_t i = 0; i < hidden_layers; ++i) sizes.push_back(hidden);
    sizes.push_back(out_dim);
    n.trunk = MlpParams::random(std::move(sizes), rng, output);
    return n;
  }
};

struct ConditionedTape {
  MlpTape embed;
  MlpTape trunk;
};

inline std::pair<Matrix, ConditionedTape> conditioned_forward(const ConditionedNet& net,
                                                              const Matrix& x, const Matrix& z) {
  if (static_cast<std::size_t>(x.cols()) != net.x_dim)
    throw DimensionError("conditioned_forward: primary input width mismatch");
  auto [e, etape] = mlp_forward(net.embed, z);
  auto [out, ttape] = mlp_forward(net.trunk, hcat({&x, &e}));
  return {std::move(out), ConditionedTape{std::move(etape), std::move(ttape)}};
}

inline Matrix conditioned_predict(const ConditionedNet& net, const Matrix& x, const Matrix& z) {
  Matrix e = mlp_predict(net.embed, z);
  return mlp_predict(net.trunk, hcat({&x, &e}));
}

struct ConditionedGradients {
  ParamGrads params;  // embed tensors, then trunk tensors
  Matrix x;           // dL/dx
};

inline ConditionedGradients conditioned_backward(const ConditionedNet& net,
                                                 const ConditionedTape& tape,
                                                 const Matrix& output_grad) {
  MlpGradients tg = mlp_backward(net.trunk, tape.trunk, output_grad);
  const auto xd = static_cast<Eigen::Index>(net.x_dim);
  Matrix de = tg.input.rightCols(tg.input.cols() - xd);
  MlpGradients eg = mlp_backward(net.embed, tape.embed, de);
  ConditionedGradients g;
  g.params = std::move(eg.params);
  for (auto& m : tg.params) g.params.push_back(std::move(m));
  g.x = tg.input.leftCols(xd);
  return g;
}

enum class PosteriorInput { StateAction, State };

struct NetArch {
  std::size_t hidden = 256;
  std::size_t hidden_layers = 2;
  std::size_t embed_dim = 16;
  LogStdRange log_std_range{};

  static NetArch from(const Ltd3Config& c) {
    return {c.hidden, c.hidden_layers, c.embed_dim, {c.posterior_log_std_min, kLogStdMax}};
  }
};

inline PosteriorInput posterior_input_for(BaselineMode m) {
  return (m == BaselineMode::Td3DiaynS || m == BaselineMode::SmerlGate) ? PosteriorInput::State
                                                                       : PosteriorInput::StateAction;
}

/// Actor, twin critics, their targets, and the posterior q(z | s[, a]).
struct AgentNets {
  LatentSpec latent;
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  Matrix action_center;  // 1 x action_dim
  Matrix action_half;    // 1 x action_dim
  PosteriorInput posterior_input = PosteriorInput::StateAction;
  LogStdRange log_std_range{};

  ConditionedNet actor, critic1, critic2;
  ConditionedNet actor_target, critic1_target, critic2_target;
  MlpParams posterior;

  static AgentNets create(const EnvSpec& env, const LatentSpec& latent, const NetArch& arch,
                          PosteriorInput post_in, Rng& rng) {
    latent.validate();
    AgentNets n;
    n.latent = latent;
    n.state_dim = env.state_dim;
    n.action_dim = env.action_dim;
    n.action_center.resize(1, static_cast<Eigen::Index>(env.action_dim));
    n.action_half.resize(1, static_cast<Eigen::Index>(env.action_dim));
    for (std::size_t i = 0; i < env.action_dim; ++i) {
      n.action_center(0, static_cast<Eigen::Index>(i)) = env.center(i);
      n.action_half(0, static_cast<Eigen::Index>(i)) = env.half_range(i);
    }
    n.posterior_input = post_in;
    n.log_std_range = arch.log_std_range;
    const std::size_t zd = latent.encoded_dim();
    const std::size_t sd = env.state_dim, ad = env.action_dim;
    n.actor = ConditionedNet::random(sd, zd, arch.embed_dim, arch.hidden, arch.hidden_layers, ad,
                                     Activation::Tanh, rng);
    n.critic1 = ConditionedNet::random(sd + ad, zd, arch.embed_dim, arch.hidden,
                                       arch.hidden_layers, 1, Activation::Linear, rng);
    n.critic2 = ConditionedNet::random(sd + ad, zd, arch.embed_dim, arch.hidden,
                                       arch.hidden_layers, 1, Activation::Linear, rng);
    n.actor_target = n.actor;
    n.critic1_target = n.critic1;
    n.critic2_target = n.critic2;
    std::vector<std::size_t> ps{post_in == PosteriorInput::State ? sd : sd + ad};
    for (std::size_t i = 0; i < arch.hidden_layers; ++i) ps.push_back(arch.hidden);
    ps.push_back(latent.posterior_dim());
    n.posterior = MlpParams::random(std::move(ps), rng, Activation::Linear);
    return n;
  }

  /// Map tanh outputs in [-1,1] onto the action box.
  Matrix to_action(const Matrix& squashed) const {
    Matrix a = squashed.array().rowwise() * action_half.row(0).array();
    a.rowwise() += action_center.row(0);
    return a;
  }

  Matrix clip_to_box(Matrix a) const {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const double lo = action_center(0, j) - action_half(0, j);
      const double hi = action_center(0, j) + action_half(0, j);
      a.col(j) = a.col(j).cwiseMax(lo).cwiseMin(hi);
    }
    return a;
  }

  /// Deterministic policy mu(s, z) for a batch.
  Matrix policy(const Matrix& s, const Matrix& z_enc) const {
    return to_action(conditioned_predict(actor, s, z_enc));
  }

  Matrix posterior_input_of(const Matrix& s, const Matrix& a) const {
    return posterior_input == PosteriorInput::State ? s : hcat({&s, &a});
  }
};

/// Polyak averaging target <- (1 - tau) target + tau online.
inline void polyak_update(ConditionedNet& target, const ConditionedNet& online, double tau) {
  auto t = target.tensors();
  auto o = online.tensors();
  for (std::size_t i = 0; i < t.size(); ++i) *t[i] = (1.0 - tau) * *t[i] + tau * *o[i];
}

}  // namespace ltd3
