#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ltd3/agent/checkpoint.hpp"
#include "ltd3/agent/gradcheck_suite.hpp"
#include "ltd3/agent/learner.hpp"

using namespace ltd3;

namespace {

Ltd3Config tiny_config(BaselineMode mode = BaselineMode::Ltd3) {
  Ltd3Config c;
  c.hidden = 8;
  c.embed_dim = 4;
  c.batch = 16;
  c.warmup_steps = 40;
  c.buffer_capacity = 5000;
  c.mode = mode;
  return c;
}

Batch random_batch(const AgentNets& n, Eigen::Index b, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto fill = [&](Eigen::Index r, Eigen::Index c, bool uniform) {
    Matrix m(r, c);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = uniform ? u(rng) : g(rng);
    return m;
  };
  Batch out;
  out.s = fill(b, static_cast<Eigen::Index>(n.state_dim), false);
  out.a = fill(b, static_cast<Eigen::Index>(n.action_dim), true);
  out.s_next = fill(b, static_cast<Eigen::Index>(n.state_dim), false);
  out.r = fill(b, 1, false).col(0);
  out.done = Vector::Zero(b);
  out.z_cont = fill(b, static_cast<Eigen::Index>(n.latent.cont_dim), true);
  for (Eigen::Index i = 0; i < b && n.latent.has_disc(); ++i) out.z_disc.push_back(static_cast<std::size_t>(i) % n.latent.disc_k);
  return out;
}

AgentNets small_nets(LatentSpec latent = {2, 0}, PosteriorInput in = PosteriorInput::StateAction) {
  Rng rng(4);
  NetArch arch;
  arch.hidden = 8;
  arch.embed_dim = 4;
  return AgentNets::create(PointVel{}.spec(), latent, arch, in, rng);
}

std::string checkpoint_bytes(Learner& l, std::uint64_t hash) {
  std::ostringstream os(std::ios::binary);
  save_checkpoint(os, l, hash);
  return os.str();
}

}  // namespace

TEST(ImportanceWeights, SpecExamples) {
  EXPECT_DOUBLE_EQ(clip_weight(4.0 / 3.0, 0.3), 1.3);
  EXPECT_DOUBLE_EQ(clip_weight(2.0 / 3.0, 0.3), 0.7);
  EXPECT_DOUBLE_EQ(clip_weight(1.1, 0.3), 1.1);
  EXPECT_THROW(clip_weight(1.0, 0.0), ConfigError);
}

TEST(ImportanceWeights, MeanOneAndShiftInvariant) {
  Rng rng(9);
  std::normal_distribution<double> g(0.0, 5.0);
  for (int rep = 0; rep < 200; ++rep) {
    Vector q(32);
    for (Eigen::Index i = 0; i < q.size(); ++i) q(i) = g(rng);
    const Vector w = normalized_importance_weights(q);
    EXPECT_NEAR(w.mean(), 1.0, 1e-12);
    const Vector ws = normalized_importance_weights((q.array() + 123.0).matrix());
    EXPECT_LT((w - ws).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ImportanceWeights, EqualQGivesUnitWeights) {
  const Vector w = normalized_importance_weights(Vector::Constant(7, 3.0));
  EXPECT_LT((w.array() - 1.0).abs().maxCoeff(), 1e-15);
  EXPECT_THROW(normalized_importance_weights(Vector(0)), DimensionError);
}

TEST(Latent, EncodingAndEntropy) {
  const LatentSpec spec{2, 3};
  Matrix zc(2, 2);
  zc << 0.1, -0.2, 0.3, 0.4;
  const Matrix e = encode_latents(spec, zc, {2, 0});
  ASSERT_EQ(e.cols(), 5);
  EXPECT_EQ(e(0, 4), 1.0);
  EXPECT_EQ(e(1, 2), 1.0);
  EXPECT_EQ(e.row(0).sum(), 0.1 - 0.2 + 1.0);
  EXPECT_NEAR(spec.prior_entropy(), 2 * std::log(2.0) + std::log(3.0), 1e-15);
  EXPECT_THROW(encode_latents(spec, zc, {3, 0}), BoundsError);
  EXPECT_THROW((LatentSpec{2, 1}.validate()), ConfigError);
}

TEST(Latent, PriorSamplesInBox) {
  Rng rng(1);
  const LatentSpec spec{3, 4};
  for (int i = 0; i < 1000; ++i) {
    const Latent z = sample_latent(spec, rng);
    for (double c : z.cont) EXPECT_LE(std::abs(c), 1.0);
    ASSERT_TRUE(z.disc.has_value());
    EXPECT_LT(*z.disc, 4u);
  }
}

TEST(Act, ZeroSigmaIsDeterministicPolicy) {
  const AgentNets n = small_nets();
  Rng rng(0);
  const Matrix s = Matrix::Ones(1, 3), z = Matrix::Zero(1, 2);
  EXPECT_EQ(act(n, s, z, 0.0, rng), n.policy(s, z));
}

TEST(Act, NoiseStdMatchesSigmaForInteriorMean) {
  AgentNets n = small_nets();
  for (Matrix* t : n.actor.trunk.tensors()) t->setZero();  // mu == 0
  Rng rng(2);
  const Matrix s = Matrix::Zero(1, 3), z = Matrix::Zero(1, 2);
  double sum = 0.0, sq = 0.0;
  const int N = 10000;
  for (int i = 0; i < N; ++i) {
    const double a = act(n, s, z, 0.1, rng)(0, 0);
    sum += a;
    sq += a * a;
  }
  const double mean = sum / N;
  EXPECT_NEAR(std::sqrt(sq / N - mean * mean), 0.1, 0.005);
}

TEST(Act, EdgeMeanIsClippedIntoBox) {
  AgentNets n = small_nets();
  for (Matrix* t : n.actor.trunk.tensors()) t->setZero();
  n.actor.trunk.biases.back().setConstant(20.0);  // tanh saturates at +1
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const Matrix a = act(n, Matrix::Zero(1, 3), Matrix::Zero(1, 2), 0.5, rng);
    EXPECT_LE(a.maxCoeff(), 1.0);
  }
}

TEST(Target, ConstantTargetCriticsGiveClosedForm) {
  AgentNets n = small_nets();
  for (ConditionedNet* c : {&n.critic1_target, &n.critic2_target})
    for (Matrix* t : c->trunk.tensors()) t->setZero();
  n.critic1_target.trunk.biases.back().setConstant(2.0);
  n.critic2_target.trunk.biases.back().setConstant(5.0);
  Rng rng(1);
  Batch b = random_batch(n, 4, rng);
  b.done(2) = 1.0;
  const Matrix z = encode_latents(n.latent, b.z_cont, b.z_disc);
  const Vector y = compute_target(n, b, z, 0.9, 0.2, 0.5, rng);
  for (Eigen::Index i = 0; i < 4; ++i)
    EXPECT_NEAR(y(i), b.r(i) + (i == 2 ? 0.0 : 0.9 * 2.0), 1e-12);
}

TEST(PosteriorLogProb, AnalyticOutputGradient) {
  const LatentSpec spec{2, 3};
  Rng rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix out(4, 7);
  for (Eigen::Index k = 0; k < out.size(); ++k) out.data()[k] = g(rng);
  out(1, 2) = -7.0;  // clamped log_std: zero gradient
  Matrix zc(4, 2);
  zc << 0.1, 0.2, -0.3, 0.9, 0.5, -0.5, 0.0, 0.7;
  const std::vector<std::size_t> zd{0, 1, 2, 1};
  const PosteriorLogProb lp = posterior_log_prob(spec, out, zc, zd);
  EXPECT_EQ(lp.d_out(1, 2), 0.0);
  std::vector<GradCheckBlock> blocks{{"out", &out, lp.d_out}};
  const auto rep = check_gradients([&] { return posterior_log_prob(spec, out, zc, zd).log_prob.sum(); }, blocks);
  EXPECT_LT(rep.max_rel_error(), 1e-6);
}

TEST(GradCheckSuite, AllLossesPassForSeveralSeeds) {
  for (std::uint64_t seed = 0; seed < 3; ++seed)
    for (const LossCheck& c : run_gradcheck_suite(seed)) EXPECT_LT(c.max_rel_error, 1e-4) << c.loss << " seed " << seed;
}

TEST(Polyak, InterpolatesTowardOnline) {
  AgentNets n = small_nets();
  ConditionedNet target = n.actor;
  for (Matrix* t : target.tensors()) t->setZero();
  polyak_update(target, n.actor, 0.25);
  EXPECT_NEAR((*target.tensors()[0])(0, 0), 0.25 * (*n.actor.tensors()[0])(0, 0), 1e-15);
  polyak_update(target, n.actor, 1.0);
  EXPECT_EQ(*target.tensors()[0], *n.actor.tensors()[0]);
}

TEST(Learner, UpdateScheduleCounts) {
  Ltd3Config c = tiny_config();
  c.d_atr = 2;
  c.d_info = 4;
  Learner l(PointVel{}, LatentSpec{2, 0}, c, 1);
  for (int i = 0; i < 240; ++i) l.train_step();
  // Updates run for t = 40..239.
  EXPECT_EQ(l.counters().critic, 200u);
  EXPECT_EQ(l.counters().actor_q, 100u);
  EXPECT_EQ(l.counters().info, 50u);
  EXPECT_EQ(l.counters().posterior, 0u);
  EXPECT_EQ(l.counters().episodes, 1u);
}

TEST(Learner, ZeroAlphaMatchesPlainTd3) {
  Ltd3Config a = tiny_config(BaselineMode::Ltd3);
  a.alpha_info = 0.0;
  const Ltd3Config b = tiny_config(BaselineMode::Td3);
  Learner la(PointVel{}, LatentSpec{2, 0}, a, 7), lb(PointVel{}, LatentSpec{2, 0}, b, 7);
  for (int i = 0; i < 300; ++i) {
    la.train_step();
    lb.train_step();
  }
  EXPECT_EQ(la.counters().info, 0u);
  EXPECT_EQ(checkpoint_bytes(la, 1), checkpoint_bytes(lb, 1));
}

TEST(Learner, ZeroWeightsLeaveInfoParametersUnchanged) {
  Learner l(PointVel{}, LatentSpec{2, 0}, tiny_config(), 3);
  Rng rng(0);
  const Batch b = random_batch(l.nets(), 8, rng);
  const Matrix z = encode_latents(l.nets().latent, b.z_cont, b.z_disc);
  const ConditionedNet actor = l.nets().actor;
  const MlpParams post = l.nets().posterior;
  l.info_update_with_weights(b, z, Vector::Zero(8));
  for (std::size_t i = 0; i < actor.tensors().size(); ++i)
    EXPECT_EQ(*actor.tensors()[i], *l.nets().actor.tensors()[i]);
  EXPECT_EQ(post.weights, l.nets().posterior.weights);
}

TEST(Learner, InfoUpdateIncreasesObjective) {
  Learner l(PointVel{}, LatentSpec{2, 0}, tiny_config(), 3);
  Rng rng(0);
  const Batch b = random_batch(l.nets(), 32, rng);
  const Matrix z = encode_latents(l.nets().latent, b.z_cont, b.z_disc);
  const Vector w = Vector::Ones(32);
  const double before = info_objective(l.nets(), b, z, w, 1.0).value;
  for (int i = 0; i < 50; ++i) l.info_update_with_weights(b, z, w);
  EXPECT_GT(info_objective(l.nets(), b, z, w, 1.0).value, before);
}

TEST(Learner, DiaynTrainsPosteriorOnly) {
  Learner l(PointVel{}, LatentSpec{2, 0}, tiny_config(BaselineMode::Td3DiaynSA), 2);
  for (int i = 0; i < 100; ++i) l.train_step();
  EXPECT_EQ(l.counters().info, 0u);
  EXPECT_EQ(l.counters().posterior, 60u);
  EXPECT_EQ(l.nets().posterior_input, PosteriorInput::StateAction);
  Learner s(PointVel{}, LatentSpec{2, 0}, tiny_config(BaselineMode::Td3DiaynS), 2);
  EXPECT_EQ(s.nets().posterior_input, PosteriorInput::State);
}

TEST(Learner, UnsupervisedRewardScalesLogQ) {
  const AgentNets n = small_nets();
  const Latent z{{0.2, -0.4}, std::nullopt};
  const std::vector<double> s{0.1, 0.5, -0.3}, a{0.2, 0.1};
  const double lq = posterior_log_q(n, row_from(s), row_from(a), row_from(z.cont), {})(0);
  EXPECT_NEAR(unsupervised_reward(n, s, a, z, 0.5), 0.5 * lq, 1e-15);
  EXPECT_EQ(unsupervised_reward(n, s, a, z, 0.0), 0.0);
}

TEST(Learner, SmerlGate) {
  EXPECT_EQ(smerl_gate(10.0, 10.05, 0.1), 1);
  EXPECT_EQ(smerl_gate(9.9, 10.0, 0.1), 0);
  Ltd3Config c = tiny_config(BaselineMode::SmerlGate);
  Learner l(PointVel{}, LatentSpec{2, 0}, c, 1);
  std::size_t ends = 0;
  for (int i = 0; i < 400; ++i) ends += l.train_step().gate >= 0 ? 1 : 0;
  EXPECT_EQ(ends, 2u);
  EXPECT_EQ(l.buffer().size(), 400u);  // whole episodes flushed at episode end
  Learner ring(RingMdp{}, LatentSpec{0, 2}, c, 1);
  EXPECT_THROW(for (int i = 0; i < 20; ++i) ring.train_step(), ConfigError);
}

TEST(Learner, SameSeedSameTrajectory) {
  Learner a(PointVel{}, LatentSpec{2, 0}, tiny_config(), 11), b(PointVel{}, LatentSpec{2, 0}, tiny_config(), 11);
  for (int i = 0; i < 150; ++i) {
    const StepDiagnostics da = a.train_step(), db = b.train_step();
    ASSERT_EQ(da.reward, db.reward);
    ASSERT_EQ(da.critic_loss, db.critic_loss);
    ASSERT_EQ(da.j_info, db.j_info);
  }
}

TEST(Checkpoint, RoundTripIsByteIdentical) {
  Learner a(PointVel{}, LatentSpec{2, 0}, tiny_config(), 5);
  for (int i = 0; i < 120; ++i) a.train_step();
  const std::string bytes = checkpoint_bytes(a, 42);
  Learner b(PointVel{}, LatentSpec{2, 0}, tiny_config(), 99);
  std::istringstream is(bytes, std::ios::binary);
  const CheckpointHeader h = load_checkpoint(is, b, 42);
  EXPECT_EQ(h.step, 120u);
  EXPECT_EQ(b.step(), 120u);
  EXPECT_EQ(checkpoint_bytes(b, 42), bytes);
}

TEST(Checkpoint, RejectsMismatchAndCorruption) {
  Learner a(PointVel{}, LatentSpec{2, 0}, tiny_config(), 5);
  const std::string bytes = checkpoint_bytes(a, 42);
  {
    std::istringstream is(bytes, std::ios::binary);
    EXPECT_THROW(load_checkpoint(is, a, 43), ConfigError);
  }
  {
    std::istringstream is(bytes, std::ios::binary);
    EXPECT_NO_THROW(load_checkpoint(is, a, 43, true));
  }
  {
    std::istringstream is(bytes.substr(0, bytes.size() / 2), std::ios::binary);
    EXPECT_THROW(load_checkpoint(is, a, 42), InputError);
  }
  {
    std::istringstream is("NOTACKPT" + bytes.substr(8), std::ios::binary);
    EXPECT_THROW(load_checkpoint(is, a, 42), InputError);
  }
  Ltd3Config wide = tiny_config();
  wide.hidden = 9;
  Learner w(PointVel{}, LatentSpec{2, 0}, wide, 5);
  std::istringstream is(bytes, std::ios::binary);
  EXPECT_THROW(load_checkpoint(is, w, 42), InputError);
}

TEST(Config, Validation) {
  Ltd3Config c;
  c.c_clip = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = Ltd3Config{};
  c.d_info = 0;
  try {
    c.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "d_info");
  }
  EXPECT_EQ(parse_baseline_mode("td3_diayn_sa"), BaselineMode::Td3DiaynSA);
  EXPECT_THROW(parse_baseline_mode("sac"), ConfigError);
}
