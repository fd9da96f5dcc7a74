#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "ltd3/envs/ring_mdp.hpp"
#include "ltd3/errors.hpp"

namespace ltd3 {

/// Finite joint table p(s, a, z), stored s-major.
class JointDistribution {
 public:
  JointDistribution(std::size_t n_s, std::size_t n_a, std::size_t n_z)
      : n_s_(n_s), n_a_(n_a), n_z_(n_z), p_(n_s * n_a * n_z, 0.0) {}

  std::size_t n_s() const { return n_s_; }
  std::size_t n_a() const { return n_a_; }
  std::size_t n_z() const { return n_z_; }

  double& at(std::size_t s, std::size_t a, std::size_t z) { return p_[(s * n_a_ + a) * n_z_ + z]; }
  double at(std::size_t s, std::size_t a, std::size_t z) const {
    return p_[(s * n_a_ + a) * n_z_ + z];
  }

  std::vector<double> marginal_z() const {
    std::vector<double> m(n_z_, 0.0);
    for (std::size_t s = 0; s < n_s_; ++s)
      for (std::size_t a = 0; a < n_a_; ++a)
        for (std::size_t z = 0; z < n_z_; ++z) m[z] += at(s, a, z);
    return m;
  }

  std::vector<double> marginal_s() const {
    std::vector<double> m(n_s_, 0.0);
    for (std::size_t s = 0; s < n_s_; ++s)
      for (std::size_t a = 0; a < n_a_; ++a)
        for (std::size_t z = 0; z < n_z_; ++z) m[s] += at(s, a, z);
    return m;
  }

  double total() const {
    double t = 0.0;
    for (double v : p_) t += v;
    return t;
  }

  void validate() const {
    for (double v : p_)
      if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("joint distribution: negative or non-finite entry");
    if (std::abs(total() - 1.0) > 1e-12) throw InputError("joint distribution: entries do not sum to 1");
  }

 private:
  std::size_t n_s_, n_a_, n_z_;
  std::vector<double> p_;
};

enum class MiMode { S_Z, SA_Z };

/// Exact I(s; z) or I(s, a; z) in nats by direct summation, 0 log 0 := 0.
inline double mi_oracle(const JointDistribution& joint, MiMode mode) {
  joint.validate();
  const std::size_t nx = mode == MiMode::S_Z ? joint.n_s() : joint.n_s() * joint.n_a();
  const std::size_t nz = joint.n_z();
  // p(x, z) with x = s or (s, a).
  std::vector<double> pxz(nx * nz, 0.0);
  for (std::size_t s = 0; s < joint.n_s(); ++s)
    for (std::size_t a = 0; a < joint.n_a(); ++a)
      for (std::size_t z = 0; z < nz; ++z) {
        const std::size_t x = mode == MiMode::S_Z ? s : s * joint.n_a() + a;
        pxz[x * nz + z] += joint.at(s, a, z);
      }
  std::vector<double> px(nx, 0.0), pz(nz, 0.0);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t z = 0; z < nz; ++z) {
      px[x] += pxz[x * nz + z];
      pz[z] += pxz[x * nz + z];
    }
  double mi = 0.0;
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t z = 0; z < nz; ++z) {
      const double p = pxz[x * nz + z];
      if (p > 0.0) mi += p * std::log(p / (px[x] * pz[z]));
    }
  return mi;
}

/// Stationary distribution of a row-stochastic matrix, solved directly
/// (periodic chains such as a deterministic ring defeat power iteration).
inline Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& P) {
  const Eigen::Index n = P.rows();
  Eigen::MatrixXd A = P.transpose() - Eigen::MatrixXd::Identity(n, n);
  A.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  return A.fullPivLu().solve(b);
}

/// Joint p(s, a, z) of the ring MDP where z uniformly selects between the
/// clockwise-everywhere (z = 0) and counter-clockwise-everywhere (z = 1)
/// policies, each in its stationary state distribution. Actions: 0 = CW, 1 = CCW.
inline JointDistribution ring_policy_joint(const RingMdp& ring) {
  const std::size_t n = ring.config().n_states;
  JointDistribution j(n, 2, 2);
  for (std::size_t z = 0; z < 2; ++z) {
    const RingAction act = z == 0 ? RingAction::Cw : RingAction::Ccw;
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t s = 0; s < n; ++s)
      P(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(ring.next_index(s, act))) = 1.0;
    const Eigen::VectorXd beta = stationary_distribution(P);
    for (std::size_t s = 0; s < n; ++s) j.at(s, z, z) = 0.5 * beta(static_cast<Eigen::Index>(s));
  }
  return j;
}

}  // namespace ltd3
