#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "ltd3/agent/importance.hpp"
#include "ltd3/agent/nets.hpp"
#include "ltd3/numerics/density.hpp"
#include "ltd3/replay/replay_buffer.hpp"

namespace ltd3 {

/// Bootstrapped TD target with target-policy smoothing:
///   a' = clip_box(mu'(s', z) + clip(eps, +-noise_clip)),  eps ~ N(0, target_sigma^2)
///   y  = r + (1 - done) * gamma * min(Q1'(s', a', z), Q2'(s', a', z))
/// The episode latent z of each sample is reused for a'.
inline Vector compute_target(const AgentNets& nets, const Batch& b, const Matrix& z_enc,
                             double gamma, double target_sigma, double noise_clip, Rng& rng) {
  Matrix a2 = nets.to_action(conditioned_predict(nets.actor_target, b.s_next, z_enc));
  std::normal_distribution<double> n01(0.0, 1.0);
  for (Eigen::Index i = 0; i < a2.rows(); ++i)
    for (Eigen::Index j = 0; j < a2.cols(); ++j) {
      const double eps = std::clamp(target_sigma * n01(rng), -noise_clip, noise_clip);
      a2(i, j) += eps;
    }
  a2 = nets.clip_to_box(std::move(a2));
  const Matrix x2 = hcat({&b.s_next, &a2});
  const Matrix q1 = conditioned_predict(nets.critic1_target, x2, z_enc);
  const Matrix q2 = conditioned_predict(nets.critic2_target, x2, z_enc);
  Vector y(b.size());
  for (Eigen::Index i = 0; i < y.size(); ++i)
    y(i) = b.r(i) + (1.0 - b.done(i)) * gamma * std::min(q1(i, 0), q2(i, 0));
  return y;
}

struct ObjectiveValue {
  double value = 0.0;
  ParamGrads grads;
};

/// Mean squared TD error of one critic against fixed targets y.
inline ObjectiveValue critic_loss(const ConditionedNet& critic, const Batch& b,
                                  const Matrix& z_enc, const Vector& y) {
  if (y.size() != b.size()) throw DimensionError("critic_loss: target count mismatch");
  const Matrix x = hcat({&b.s, &b.a});
  auto [q, tape] = conditioned_forward(critic, x, z_enc);
  const double inv_b = 1.0 / static_cast<double>(b.size());
  Matrix diff = q.col(0) - y;
  ObjectiveValue out;
  out.value = diff.squaredNorm() * inv_b;
  if (!std::isfinite(out.value)) throw NumericError("critic_loss: non-finite loss");
  out.grads = conditioned_backward(critic, tape, 2.0 * inv_b * diff).params;
  return out;
}

/// J_Q(theta) = mean Q1(s, mu(s, z), z); gradient flows critic -> action ->
/// actor, critic parameters are held fixed.
inline ObjectiveValue actor_q_objective(const AgentNets& nets, const Batch& b, const Matrix& z_enc) {
  auto [squashed, atape] = conditioned_forward(nets.actor, b.s, z_enc);
  const Matrix a = nets.to_action(squashed);
  auto [q, ctape] = conditioned_forward(nets.critic1, hcat({&b.s, &a}), z_enc);
  const double inv_b = 1.0 / static_cast<double>(b.size());
  ObjectiveValue out;
  out.value = q.sum() * inv_b;
  const Matrix dq = Matrix::Constant(q.rows(), 1, inv_b);
  const ConditionedGradients cg = conditioned_backward(nets.critic1, ctape, dq);
  const auto ad = static_cast<Eigen::Index>(nets.action_dim);
  Matrix dsq = cg.x.rightCols(ad).array().rowwise() * nets.action_half.row(0).array();
  out.grads = conditioned_backward(nets.actor, atape, dsq).params;
  return out;
}

struct PosteriorLogProb {
  Vector log_prob;  // per sample
  Matrix d_out;     // d log_prob_i / d posterior output row i
};

/// log q(z | .) from raw posterior outputs laid out as
/// [mean (cont_dim), log_std (cont_dim), logits (disc_k)]: factored Gaussian
/// over z_cont plus categorical over z_disc. log_std is clamped; clamped
/// entries get zero gradient.
inline PosteriorLogProb posterior_log_prob(const LatentSpec& spec, const Matrix& out,
                                           const Matrix& z_cont,
                                           const std::vector<std::size_t>& z_disc,
                                           LogStdRange range = {}) {
  const Eigen::Index n = out.rows();
  const auto cd = static_cast<Eigen::Index>(spec.cont_dim);
  const auto k = static_cast<Eigen::Index>(spec.disc_k);
  if (out.cols() != 2 * cd + k) throw DimensionError("posterior_log_prob: output width mismatch");
  if (z_cont.rows() != n || z_cont.cols() != cd)
    throw DimensionError("posterior_log_prob: z_cont shape mismatch");
  if (spec.has_disc() && static_cast<Eigen::Index>(z_disc.size()) != n)
    throw DimensionError("posterior_log_prob: z_disc size mismatch");

  PosteriorLogProb r;
  r.log_prob.resize(n);
  r.d_out = Matrix::Zero(n, out.cols());
  std::vector<double> zc(spec.cont_dim), mu(spec.cont_dim), ls(spec.cont_dim);
  std::vector<double> logits(spec.disc_k);
  for (Eigen::Index i = 0; i < n; ++i) {
    double lp = 0.0;
    if (cd > 0) {
      for (Eigen::Index j = 0; j < cd; ++j) {
        zc[j] = z_cont(i, j);
        mu[j] = out(i, j);
        const double raw = out(i, cd + j);
        ls[j] = range.clamp(raw);
        const double inv_var = std::exp(-2.0 * ls[j]);
        const double d = zc[j] - mu[j];
        r.d_out(i, j) = d * inv_var;
        r.d_out(i, cd + j) = range.interior(raw) ? d * d * inv_var - 1.0 : 0.0;
      }
      lp += gaussian_log_prob(zc, mu, ls);
    }
    if (k > 0) {
      for (Eigen::Index j = 0; j < k; ++j) logits[j] = out(i, 2 * cd + j);
      const std::size_t label = z_disc[static_cast<std::size_t>(i)];
      lp += categorical_log_prob(logits, label);
      const auto p = softmax(logits);
      for (Eigen::Index j = 0; j < k; ++j)
        r.d_out(i, 2 * cd + j) = (static_cast<std::size_t>(j) == label ? 1.0 : 0.0) - p[j];
    }
    r.log_prob(i) = lp;
  }
  return r;
}

/// log q(z | s[, a]) for a batch using the given actions.
inline Vector posterior_log_q(const AgentNets& nets, const Matrix& s, const Matrix& a,
                              const Matrix& z_cont, const std::vector<std::size_t>& z_disc) {
  const Matrix out = mlp_predict(nets.posterior, nets.posterior_input_of(s, a));
  return posterior_log_prob(nets.latent, out, z_cont, z_disc, nets.log_std_range).log_prob;
}

/// Truncated importance weights from Q1 on the stored actions.
inline Vector info_weights(const AgentNets& nets, const Batch& b, const Matrix& z_enc,
                           double c_clip) {
  const Matrix q = conditioned_predict(nets.critic1, hcat({&b.s, &b.a}), z_enc);
  return clip_weights(normalized_importance_weights(q.col(0)), c_clip);
}

struct InfoObjective {
  double value = 0.0;
  ParamGrads actor;
  ParamGrads posterior;
};

/// J_info(theta, phi) = alpha * mean_i w_i * log q_phi(z_i | s_i, mu_theta(s_i, z_i)).
/// The weights are constants; the log-likelihood gradient is propagated from
/// the posterior through the regenerated action into the actor.
inline InfoObjective info_objective(const AgentNets& nets, const Batch& b, const Matrix& z_enc,
                                    const Vector& weights, double alpha) {
  if (weights.size() != b.size()) throw DimensionError("info_objective: weight count mismatch");
  auto [squashed, atape] = conditioned_forward(nets.actor, b.s, z_enc);
  const Matrix a = nets.to_action(squashed);
  auto [out, ptape] = mlp_forward(nets.posterior, nets.posterior_input_of(b.s, a));
  const PosteriorLogProb lp = posterior_log_prob(nets.latent, out, b.z_cont, b.z_disc, nets.log_std_range);
  if (!lp.log_prob.allFinite()) throw NumericError("info_objective: non-finite log-probability");
  const double inv_b = 1.0 / static_cast<double>(b.size());

  InfoObjective r;
  r.value = alpha * inv_b * weights.dot(lp.log_prob);
  Matrix dout = lp.d_out;
  for (Eigen::Index i = 0; i < dout.rows(); ++i) dout.row(i) *= alpha * inv_b * weights(i);
  MlpGradients pg = mlp_backward(nets.posterior, ptape, dout);
  r.posterior = std::move(pg.params);
  const auto ad = static_cast<Eigen::Index>(nets.action_dim);
  Matrix da = nets.posterior_input == PosteriorInput::State
                  ? Matrix::Zero(b.size(), ad)
                  : Matrix(pg.input.rightCols(ad));
  Matrix dsq = da.array().rowwise() * nets.action_half.row(0).array();
  r.actor = conditioned_backward(nets.actor, atape, dsq).params;
  return r;
}

/// Maximum-likelihood objective for the posterior on stored actions:
/// mean log q_phi(z | s[, a]).
inline ObjectiveValue posterior_ml_objective(const AgentNets& nets, const Batch& b) {
  auto [out, tape] = mlp_forward(nets.posterior, nets.posterior_input_of(b.s, b.a));
  const PosteriorLogProb lp = posterior_log_prob(nets.latent, out, b.z_cont, b.z_disc, nets.log_std_range);
  const double inv_b = 1.0 / static_cast<double>(b.size());
  ObjectiveValue r;
  r.value = lp.log_prob.sum() * inv_b;
  if (!std::isfinite(r.value)) throw NumericError("posterior_ml_objective: non-finite value");
  r.grads = mlp_backward(nets.posterior, tape, lp.d_out * inv_b).params;
  return r;
}

}  // namespace ltd3
