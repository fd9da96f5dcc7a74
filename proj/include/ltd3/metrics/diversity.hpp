#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ltd3/agent/rollout.hpp"
#include "ltd3/errors.hpp"

namespace ltd3 {

/// Mean action of a policy over the states it visits.
struct BehaviorEmbedding {
  std::vector<double> mean_action;
  std::size_t episodes = 0;
  std::string id;
};

inline BehaviorEmbedding behavior_embedding(const Policy& policy, const Environment& env,
                                            std::size_t n_episodes, Rng& rng,
                                            std::string id = {}) {
  if (n_episodes < 1) throw ConfigError("behavior_embedding: need at least one episode");
  BehaviorEmbedding e;
  e.id = std::move(id);
  e.episodes = n_episodes;
  e.mean_action.assign(env.spec().action_dim, 0.0);
  std::size_t steps = 0;
  for (std::size_t k = 0; k < n_episodes; ++k) {
    EpisodeResult r = run_episode(env, policy, rng);
    for (std::size_t i = 0; i < r.action_sum.size(); ++i) e.mean_action[i] += r.action_sum[i];
    steps += r.steps;
  }
  for (double& v : e.mean_action) v /= static_cast<double>(steps);
  return e;
}

/// Squared-exponential Gram matrix K_ij = exp(-|x_i - x_j|^2 / (2 h^2)).
inline Eigen::MatrixXd se_gram(const std::vector<std::vector<double>>& x, double h) {
  const auto m = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd K(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i; j < m; ++j) {
      const auto& a = x[static_cast<std::size_t>(i)];
      const auto& b = x[static_cast<std::size_t>(j)];
      if (a.size() != b.size()) throw DimensionError("se_gram: embedding dimensions differ");
      double d2 = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) d2 += (a[k] - b[k]) * (a[k] - b[k]);
      K(i, j) = K(j, i) = i == j ? 1.0 : std::exp(-d2 / (2.0 * h * h));
    }
  return K;
}

/// det of the Gram matrix, in [0, 1]. Computed from the symmetric
/// eigendecomposition; eigenvalues at round-off level are treated as zero so
/// singular inputs give exactly 0.
inline double diversity_score(const std::vector<std::vector<double>>& embeddings, double h) {
  if (embeddings.empty()) throw InputError("diversity_score: need at least one embedding");
  if (!(h > 0.0)) throw ConfigError("diversity_score: length scale must be > 0", "diversity_h");
  const Eigen::MatrixXd K = se_gram(embeddings, h);
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(K, Eigen::EigenvaluesOnly).eigenvalues();
  const double cutoff = 1e-13 * static_cast<double>(K.rows());
  double det = 1.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) <= cutoff) return 0.0;
    det *= ev(i);
  }
  return std::clamp(det, 0.0, 1.0);
}

inline double diversity_score(const std::vector<BehaviorEmbedding>& embeddings, double h) {
  std::vector<std::vector<double>> x;
  x.reserve(embeddings.size());
  for (const auto& e : embeddings) x.push_back(e.mean_action);
  return diversity_score(x, h);
}

}  // namespace ltd3
