#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ltd3/harness/fewshot.hpp"
#include "ltd3/harness/run_config.hpp"
#include "ltd3/harness/sweep.hpp"
#include "ltd3/harness/train_run.hpp"

using namespace ltd3;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ltd3_test_" + name);
  fs::remove_all(p);
  return p;
}

RunConfig tiny_run(const std::string& dir) {
  RunConfig c;
  c.agent.hidden = 8;
  c.agent.embed_dim = 4;
  c.agent.batch = 16;
  c.agent.warmup_steps = 50;
  c.agent.total_steps = 450;
  c.agent.buffer_capacity = 2000;
  c.pv.horizon = 50;
  c.eval_interval = 200;
  c.eval_episodes = 2;
  c.diversity_latents = 3;
  c.mi_samples = 100;
  c.checkpoint_interval = 200;
  c.out_dir = dir;
  return c;
}

}  // namespace

TEST(RunConfig, SerializeParseRoundTrip) {
  RunConfig a;
  a.agent.c_clip = 0.123456789012345;
  a.agent.mode = BaselineMode::SmerlGate;
  a.ring.reward_states = {1, 2};
  a.seed = 77;
  RunConfig b;
  apply_config_text(b, serialize_config(a));
  EXPECT_EQ(serialize_config(a), serialize_config(b));
  EXPECT_EQ(b.agent.c_clip, a.agent.c_clip);
  EXPECT_TRUE(std::isnan(b.agent.r_star));
}

TEST(RunConfig, CommentsWhitespaceAndOverrides) {
  RunConfig c;
  apply_config_text(c, "# comment\n  c_clip = 0.5  # trailing\n\nmode=td3\n");
  EXPECT_EQ(c.agent.c_clip, 0.5);
  EXPECT_EQ(c.agent.mode, BaselineMode::Td3);
  set_config_value(c, "c_clip", "1.0");
  EXPECT_EQ(c.agent.c_clip, 1.0);
}

TEST(RunConfig, ErrorsNameTheKey) {
  RunConfig c;
  try {
    apply_config_text(c, "bogus_key=1\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "bogus_key");
  }
  try {
    set_config_value(c, "batch", "12x");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "batch");
  }
  EXPECT_THROW(apply_config_text(c, "no_equals_sign\n"), ConfigError);
  EXPECT_THROW(set_config_value(c, "batch", "-3"), ConfigError);
}

TEST(RunConfig, MissingFileNamesPath) {
  try {
    load_config_file("/nonexistent/missing.cfg");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/missing.cfg"), std::string::npos);
  }
}

TEST(RunConfig, HashIgnoresOutDirOnly) {
  RunConfig a, b;
  b.out_dir = "elsewhere";
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.seed = 1;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(RunConfig, Validation) {
  RunConfig c;
  c.env = "mujoco";
  EXPECT_THROW(validate_config(c), ConfigError);
  c = RunConfig{};
  c.pv_variant = "windy";
  EXPECT_THROW(validate_config(c), ConfigError);
  c = RunConfig{};
  c.latent = {0, 4};
  c.fewshot.budget = 3;
  EXPECT_THROW(validate_config(c), ConfigError);
  c.fewshot.budget = 4;
  EXPECT_NO_THROW(validate_config(c));
}

TEST(RunConfig, SchemaKeysAreUnique) {
  std::set<std::string> keys;
  for (const auto& f : config_schema()) EXPECT_TRUE(keys.insert(f.key).second) << f.key;
}

TEST(TrainRun, ZeroStepsWritesHeaderAndInitialCheckpoint) {
  RunConfig c = tiny_run(scratch("zero").string());
  c.agent.total_steps = 0;
  const RunResult r = train_run(c);
  EXPECT_EQ(slurp(r.metrics_path), std::string(kMetricsHeader) + "\n");
  ASSERT_EQ(r.checkpoints.size(), 1u);
  EXPECT_EQ(r.checkpoints[0].filename(), "ckpt_000000000.bin");
  EXPECT_TRUE(fs::exists(r.manifest_path));
}

TEST(TrainRun, RowsCheckpointsAndDeterminism) {
  const RunResult a = train_run(tiny_run(scratch("det_a").string()));
  const RunResult b = train_run(tiny_run(scratch("det_b").string()));
  ASSERT_EQ(a.rows.size(), 3u);  // 200, 400, 450
  EXPECT_EQ(a.rows.back().step, 450u);
  ASSERT_EQ(a.checkpoints.size(), 4u);  // 0, 200, 400, 450
  EXPECT_EQ(slurp(a.metrics_path), slurp(b.metrics_path));
  for (std::size_t i = 0; i < a.checkpoints.size(); ++i)
    EXPECT_EQ(slurp(a.checkpoints[i]), slurp(b.checkpoints[i]));
  const std::string csv = slurp(a.metrics_path);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kMetricsHeader);

  RunConfig other = tiny_run(scratch("det_c").string());
  other.seed = 1;
  EXPECT_NE(slurp(train_run(other).metrics_path), csv);
}

TEST(TrainRun, CheckpointReloadsIntoSameConfig) {
  const RunConfig c = tiny_run(scratch("reload").string());
  const RunResult r = train_run(c);
  const auto l = load_learner(c, r.checkpoints.back());
  EXPECT_EQ(l->step(), 450u);
  std::ostringstream os(std::ios::binary);
  save_checkpoint(os, *l, config_hash(c));
  EXPECT_EQ(os.str(), slurp(r.checkpoints.back()));
  RunConfig changed = c;
  changed.agent.lr = 1e-3;
  EXPECT_THROW(load_learner(changed, r.checkpoints.back()), ConfigError);
}

TEST(FewShot, SingleCandidateAndExactBudget) {
  RunConfig c = tiny_run(scratch("fs").string());
  c.agent.total_steps = 0;
  const RunResult r = train_run(c);
  FewShotConfig fsc;
  fsc.budget = 1;
  Rng rng(0);
  const Environment test = make_environment(c, "blocked");
  const FewShotResult one = fewshot_adapt(r.learner->nets(), fsc, test, rng);
  EXPECT_EQ(one.best_candidate, 0u);
  EXPECT_EQ(one.log.size(), 6u);

  fsc.budget = 8;
  const FewShotResult res = fewshot_adapt(r.learner->nets(), fsc, test, rng);
  ASSERT_EQ(res.log.size(), 13u);
  double best = -1e300;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(res.log[i].phase, "candidate");
    if (res.log[i].ret > best) best = res.log[i].ret, arg = i;
  }
  EXPECT_EQ(res.best_candidate, arg);
  const fs::path log = fs::path(c.out_dir) / "fewshot.csv";
  write_fewshot_log(log, res);
  EXPECT_EQ(count_fewshot_log_episodes(log), 13u);
}

TEST(FewShot, TiesKeepFirstCandidate) {
  // A zero actor gives every latent the same deterministic return.
  RunConfig c = tiny_run(scratch("fs_tie").string());
  auto l = make_learner(c);
  for (Matrix* t : l->nets().actor.trunk.tensors()) t->setZero();
  FewShotConfig fsc;
  fsc.budget = 5;
  Rng rng(0);
  PointVelConfig pc;
  const FewShotResult r = fewshot_adapt(l->nets(), fsc, PointVel(pc), rng);
  EXPECT_EQ(r.best_candidate, 0u);
}

TEST(FewShot, DiscreteEnumerationAndUnderflow) {
  const LatentSpec spec{0, 3};
  Rng rng(0);
  const auto c = fewshot_candidates(spec, 5, rng);
  ASSERT_EQ(c.size(), 5u);
  EXPECT_EQ(*c[0].disc, 0u);
  EXPECT_EQ(*c[2].disc, 2u);
  EXPECT_EQ(*c[3].disc, 0u);
  FewShotConfig fsc;
  fsc.budget = 2;
  EXPECT_THROW(fsc.validate(spec), ConfigError);
}

TEST(FewShot, BudgetedEnvRefusesExtraEpisodes) {
  const Environment env = PointVel{};
  BudgetedEnv b(env, 1);
  Rng rng(0);
  const Policy p = [](const std::vector<double>&) { return std::vector<double>{0.0, 0.0}; };
  b.episode(p, rng);
  EXPECT_THROW(b.episode(p, rng), StateError);
}

TEST(Sweep, EmptyListGivesHeaderOnly) {
  const SweepReport rep = sweep({});
  EXPECT_TRUE(rep.runs.empty());
  EXPECT_EQ(sweep_csv(rep), std::string(kSweepHeader) + "\n");
}

TEST(Sweep, AggregatesSeedsAndIsolatesFailures) {
  std::vector<RunConfig> cs;
  for (double clip : {0.1, 1.0})
    for (std::uint64_t seed : {0, 1}) {
      RunConfig c = tiny_run(scratch("sw_" + std::to_string(clip) + "_" + std::to_string(seed)).string());
      c.agent.total_steps = 200;
      c.agent.c_clip = clip;
      c.seed = seed;
      cs.push_back(c);
    }
  RunConfig bad = cs.front();
  bad.agent.c_clip = -1.0;
  bad.out_dir = scratch("sw_bad").string();
  cs.push_back(bad);
  const SweepReport rep = sweep(cs, 2);
  EXPECT_EQ(rep.failures(), 1u);
  EXPECT_EQ(rep.runs.back().label, "c_clip=-1");
  const std::string csv = sweep_csv(rep);
  EXPECT_NE(csv.find("\"c_clip=0.1\",200,2,"), std::string::npos);
  EXPECT_NE(csv.find("\"c_clip=1\",200,2,"), std::string::npos);
  EXPECT_EQ(csv.find("c_clip=-1"), std::string::npos);
}

TEST(Format, FullAndFixed) {
  EXPECT_EQ(format_full(0.1), "0.1");
  EXPECT_EQ(parse_double(format_full(1.0 / 3.0), "k"), 1.0 / 3.0);
  EXPECT_EQ(format_fixed4(std::log(2.0)), "0.6931");
  EXPECT_EQ(format_fixed4(0.0), "0.0000");
}
