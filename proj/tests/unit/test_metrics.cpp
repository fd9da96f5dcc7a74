#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ltd3/harness/ring_fit.hpp"
#include "ltd3/metrics/diversity.hpp"
#include "ltd3/metrics/mi_bound.hpp"
#include "ltd3/metrics/mi_oracle.hpp"
#include "ltd3/numerics/adam.hpp"

using namespace ltd3;

namespace {

using Points = std::vector<std::vector<double>>;

JointDistribution random_joint(std::size_t ns, std::size_t na, std::size_t nz, Rng& rng) {
  std::gamma_distribution<double> g(0.5, 1.0);
  JointDistribution j(ns, na, nz);
  double t = 0.0;
  for (std::size_t s = 0; s < ns; ++s)
    for (std::size_t a = 0; a < na; ++a)
      for (std::size_t z = 0; z < nz; ++z) t += (j.at(s, a, z) = g(rng) + 1e-3);
  for (std::size_t s = 0; s < ns; ++s)
    for (std::size_t a = 0; a < na; ++a)
      for (std::size_t z = 0; z < nz; ++z) j.at(s, a, z) /= t;
  return j;
}

/// One-hot (s, a) rows with discrete labels z drawn from a joint table.
Batch sample_joint(const JointDistribution& j, std::size_t n, Rng& rng) {
  std::vector<double> w;
  for (std::size_t s = 0; s < j.n_s(); ++s)
    for (std::size_t a = 0; a < j.n_a(); ++a)
      for (std::size_t z = 0; z < j.n_z(); ++z) w.push_back(j.at(s, a, z));
  std::discrete_distribution<std::size_t> d(w.begin(), w.end());
  Batch b;
  const auto N = static_cast<Eigen::Index>(n);
  b.s = Matrix::Zero(N, static_cast<Eigen::Index>(j.n_s()));
  b.a = Matrix::Zero(N, static_cast<Eigen::Index>(j.n_a()));
  b.z_cont = Matrix(N, 0);
  for (Eigen::Index i = 0; i < N; ++i) {
    std::size_t k = d(rng);
    const std::size_t z = k % j.n_z();
    k /= j.n_z();
    b.a(i, static_cast<Eigen::Index>(k % j.n_a())) = 1.0;
    b.s(i, static_cast<Eigen::Index>(k / j.n_a())) = 1.0;
    b.z_disc.push_back(z);
  }
  return b;
}

}  // namespace

TEST(MiOracle, RingConstruction) {
  const JointDistribution j = ring_policy_joint(RingMdp{});
  EXPECT_NEAR(mi_oracle(j, MiMode::S_Z), 0.0, 1e-12);
  EXPECT_NEAR(mi_oracle(j, MiMode::SA_Z), std::numbers::ln2, 1e-12);
}

TEST(MiOracle, IndependentIsZero) {
  JointDistribution j(3, 2, 2);
  const double ps[3] = {0.2, 0.3, 0.5}, pa[2] = {0.4, 0.6}, pz[2] = {0.25, 0.75};
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t z = 0; z < 2; ++z) j.at(s, a, z) = ps[s] * pa[a] * pz[z];
  EXPECT_NEAR(mi_oracle(j, MiMode::S_Z), 0.0, 1e-14);
  EXPECT_NEAR(mi_oracle(j, MiMode::SA_Z), 0.0, 1e-14);
}

TEST(MiOracle, DeterministicLatentOfStateEqualsEntropy) {
  JointDistribution j(4, 1, 2);
  const double p[4] = {0.1, 0.2, 0.3, 0.4};
  for (std::size_t s = 0; s < 4; ++s) j.at(s, 0, s / 2) = p[s];
  const double hz = -(0.3 * std::log(0.3) + 0.7 * std::log(0.7));
  EXPECT_NEAR(mi_oracle(j, MiMode::S_Z), hz, 1e-14);
}

TEST(MiOracle, RejectsUnnormalizedTables) {
  JointDistribution j(2, 1, 1);
  j.at(0, 0, 0) = 0.5;
  EXPECT_THROW(mi_oracle(j, MiMode::S_Z), InputError);
  j.at(1, 0, 0) = 0.6;
  EXPECT_THROW(mi_oracle(j, MiMode::S_Z), InputError);
}

TEST(MiOracle, PropertiesOnRandomJoints) {
  Rng rng(17);
  for (int rep = 0; rep < 50; ++rep) {
    const JointDistribution j = random_joint(3, 2, 3, rng);
    const double isz = mi_oracle(j, MiMode::S_Z), isaz = mi_oracle(j, MiMode::SA_Z);
    EXPECT_GE(isz, -1e-15);
    EXPECT_GE(isaz, isz - 1e-12);  // adding a never loses information
    double hz = 0.0;
    for (double p : j.marginal_z()) hz -= p * std::log(p);
    EXPECT_LE(isaz, hz + 1e-12);
    // Relabeling z leaves the value unchanged.
    JointDistribution r(3, 2, 3);
    for (std::size_t s = 0; s < 3; ++s)
      for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t z = 0; z < 3; ++z) r.at(s, a, (z + 1) % 3) = j.at(s, a, z);
    EXPECT_NEAR(mi_oracle(r, MiMode::SA_Z), isaz, 1e-13);
  }
}

TEST(MiLowerBound, UniformPosteriorIsZero) {
  const RingMdp ring;
  Rng rng(0);
  NetArch arch;
  arch.hidden = 4;
  AgentNets n = AgentNets::create(ring.spec(), LatentSpec{0, 2}, arch, PosteriorInput::StateAction, rng);
  for (Matrix* t : n.posterior.tensors()) t->setZero();
  ReplayBuffer buf({4, 1, 0, true}, 256);
  collect_ring_labeled(ring, 256, buf, rng);
  EXPECT_NEAR(mi_lower_bound(buf.recent(256), n), 0.0, 1e-15);
}

TEST(MiLowerBound, NeverExceedsOracleOnRandomJoints) {
  Rng rng(23);
  for (int rep = 0; rep < 20; ++rep) {
    const JointDistribution j = random_joint(3, 2, 2, rng);
    EnvSpec spec;
    spec.state_dim = 3;
    spec.action_dim = 2;
    spec.action_low = {-1, -1};
    spec.action_high = {1, 1};
    NetArch arch;
    arch.hidden = 16;
    AgentNets n = AgentNets::create(spec, LatentSpec{0, 2}, arch, PosteriorInput::StateAction, rng);
    AdamState opt(std::span<Matrix* const>(n.posterior.tensors()), AdamConfig{1e-2});
    const Batch train = sample_joint(j, 2000, rng);
    for (int it = 0; it < 300; ++it) {
      const ObjectiveValue o = posterior_ml_objective(n, train);
      adam_step(opt, n.posterior.tensors(), o.grads, true);
    }
    // Entropy of the empirical z marginal replaces the uniform-prior term.
    const Batch test = sample_joint(j, 20000, rng);
    const Vector lq = posterior_log_q(n, test.s, test.a, test.z_cont, test.z_disc);
    double hz = 0.0;
    for (double p : j.marginal_z()) hz -= p * std::log(p);
    EXPECT_LE(lq.mean() + hz, mi_oracle(j, MiMode::SA_Z) + 0.02) << "rep " << rep;
  }
}

TEST(RingFit, StateActionPosteriorApproachesLog2) {
  RingFitConfig fc;
  fc.steps = 3000;
  const RingFitResult sa = ring_posterior_fit(RingMdp{}, PosteriorInput::StateAction, fc, 1);
  EXPECT_GE(sa.final_bound, 0.64);
  EXPECT_LE(sa.final_bound, std::numbers::ln2 + 1e-9);
  const RingFitResult s = ring_posterior_fit(RingMdp{}, PosteriorInput::State, fc, 1);
  EXPECT_LE(s.final_bound, 0.05);
}

TEST(Diversity, ClosedFormCases) {
  EXPECT_EQ(diversity_score(Points{{0.3, 0.1}}, 1.0), 1.0);
  EXPECT_EQ(diversity_score(Points{{0.3, 0.1}, {0.3, 0.1}}, 1.0), 0.0);
  const double h = 0.7, d = h * std::sqrt(2.0 * std::numbers::ln2);
  EXPECT_NEAR(diversity_score(Points{{0.0, 0.0}, {d, 0.0}}, h), 0.75, 1e-12);
  EXPECT_THROW(diversity_score(Points{{0.0}}, 0.0), ConfigError);
  EXPECT_THROW(diversity_score(Points{}, 1.0), InputError);
}

TEST(Diversity, PermutationInvariantAndBounded) {
  Rng rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<std::vector<double>> x(5, std::vector<double>(2));
    for (auto& v : x)
      for (double& c : v) c = u(rng);
    const double a = diversity_score(x, 0.5);
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 1.0);
    std::shuffle(x.begin(), x.end(), rng);
    EXPECT_NEAR(diversity_score(x, 0.5), a, 1e-12 + 1e-9 * a);
  }
}

TEST(Diversity, MonotoneInPairDistance) {
  double prev = -1.0;
  for (double d = 0.0; d <= 3.0; d += 0.1) {
    const double s = diversity_score(Points{{0.0}, {d}}, 1.0);
    EXPECT_GE(s, prev);
    prev = s;
  }
}

TEST(BehaviorEmbedding, ConstantPolicy) {
  Rng rng(0);
  const Policy p = [](const std::vector<double>&) { return std::vector<double>{0.25, -0.5}; };
  const BehaviorEmbedding e = behavior_embedding(p, PointVel{}, 2, rng, "c");
  EXPECT_DOUBLE_EQ(e.mean_action[0], 0.25);
  EXPECT_DOUBLE_EQ(e.mean_action[1], -0.5);
  EXPECT_EQ(e.episodes, 2u);
}

TEST(BehaviorEmbedding, RingPoliciesArePlusMinusOne) {
  Rng rng(0);
  const Policy cw = [](const std::vector<double>&) { return std::vector<double>{RingMdp::encode(RingAction::Cw)}; };
  const Policy ccw = [](const std::vector<double>&) { return std::vector<double>{RingMdp::encode(RingAction::Ccw)}; };
  EXPECT_EQ(behavior_embedding(cw, RingMdp{}, 3, rng).mean_action[0], 1.0);
  EXPECT_EQ(behavior_embedding(ccw, RingMdp{}, 3, rng).mean_action[0], -1.0);
}

TEST(BehaviorEmbedding, SeededRepeatable) {
  const Policy p = [](const std::vector<double>& o) { return std::vector<double>{o[0], 0.1}; };
  Rng a(9), b(9);
  EXPECT_EQ(behavior_embedding(p, PointVel{}, 2, a).mean_action, behavior_embedding(p, PointVel{}, 2, b).mean_action);
}
