// ltd3 command line: training, evaluation, metrics, sweeps and self-checks.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ltd3/agent/gradcheck_suite.hpp"
#include "ltd3/harness/fewshot.hpp"
#include "ltd3/harness/run_config.hpp"
#include "ltd3/harness/sweep.hpp"
#include "ltd3/harness/train_run.hpp"
#include "ltd3/metrics/mi_oracle.hpp"

namespace {

using namespace ltd3;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

/// Config file plus one --key option per schema entry.
struct ConfigOptions {
  std::string config_path;
  std::map<std::string, std::pair<CLI::Option*, std::string>> values;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key=value config file");
    RunConfig defaults;
    for (const auto& f : config_schema()) {
      auto& slot = values[f.key];
      slot.first = app->add_option("--" + f.key, slot.second, f.help + " [default: " + f.get(defaults) + "]");
    }
  }

  RunConfig resolve() const {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config_file(config_path);
    for (const auto& f : config_schema()) {
      const auto& [opt, v] = values.at(f.key);
      if (opt->count() > 0) set_config_value(cfg, f.key, v);
    }
    validate_config(cfg);
    return cfg;
  }
};

void print_row(const MetricsRow& r) {
  std::printf("step %zu  ret %s +- %s  mi %s  div %s\n", r.step, format_fixed4(r.ret_mean).c_str(),
              format_fixed4(r.ret_std).c_str(), format_fixed4(r.mi_bound).c_str(),
              format_fixed4(r.diversity).c_str());
  std::fflush(stdout);
}

int cmd_train(const ConfigOptions& co) {
  const RunConfig cfg = co.resolve();
  const RunResult r = train_run(cfg, print_row);
  std::printf("metrics  %s\nmanifest %s\n", r.metrics_path.string().c_str(), r.manifest_path.string().c_str());
  return kExitOk;
}

std::vector<Latent> latent_grid(const LatentSpec& spec, std::size_t m, Rng& rng) {
  std::vector<Latent> zs;
  for (std::size_t i = 0; i < m; ++i) zs.push_back(sample_latent(spec, rng));
  return zs;
}

int cmd_eval(const ConfigOptions& co, const std::string& ckpt, std::size_t m, const std::string& out, bool force) {
  const RunConfig cfg = co.resolve();
  const auto l = load_learner(cfg, ckpt, force);
  const Environment env = make_train_environment(cfg);
  Rng rng = make_stream(cfg.seed, "cli_eval");
  std::string csv = "z_index,z,ret_mean,ret_std\n";
  for (const Latent& z : latent_grid(cfg.latent, m, rng)) {
    std::vector<double> rets;
    for (std::size_t e = 0; e < cfg.eval_episodes; ++e)
      rets.push_back(run_episode(env, deterministic_policy(l->nets(), z), rng).ret);
    const ReturnStats s = return_stats(rets);
    const std::size_t i = std::count(csv.begin(), csv.end(), '\n') - 1;
    csv += std::to_string(i) + "," + latent_text(z) + "," + format_full(s.mean) + "," + format_full(s.std) + "\n";
    std::printf("z %zu [%s]  ret %s +- %s\n", i, latent_text(z).c_str(), format_fixed4(s.mean).c_str(),
                format_fixed4(s.std).c_str());
  }
  if (!out.empty()) std::ofstream(out) << csv;
  return kExitOk;
}

int cmd_diversity(const ConfigOptions& co, const std::string& ckpt, const std::string& out, bool force) {
  const RunConfig cfg = co.resolve();
  const auto l = load_learner(cfg, ckpt, force);
  const Environment env = make_train_environment(cfg);
  Rng rng = make_stream(cfg.seed, "cli_diversity");
  const auto em = latent_embeddings(l->nets(), env, cfg.diversity_latents, cfg.diversity_episodes, rng);
  std::string csv = "id";
  for (std::size_t d = 0; d < env.spec().action_dim; ++d) csv += ",phi" + std::to_string(d);
  csv += "\n";
  for (const auto& e : em) {
    csv += e.id;
    for (double v : e.mean_action) csv += "," + format_full(v);
    csv += "\n";
  }
  const double score = diversity_score(em, cfg.diversity_h);
  std::printf("diversity %s  (M=%zu, h=%s)\n", format_fixed4(score).c_str(), em.size(),
              format_fixed4(cfg.diversity_h).c_str());
  std::printf("diversity_full %s\n", format_full(score).c_str());
  if (!out.empty()) std::ofstream(out) << csv;
  return kExitOk;
}

int cmd_fewshot(const ConfigOptions& co, const std::string& ckpt, const std::string& log, bool force) {
  const RunConfig cfg = co.resolve();
  const FewShotResult r = fewshot_from_checkpoint(cfg, ckpt, force);
  if (!log.empty()) write_fewshot_log(log, r);
  std::printf("best_z [%s]  adapted %s +- %s  episodes %zu\n", latent_text(r.best_z).c_str(),
              format_fixed4(r.adapted_mean).c_str(), format_fixed4(r.adapted_std).c_str(), r.log.size());
  return kExitOk;
}

int cmd_mi_oracle(const std::string& env) {
  if (env != "ring") throw ConfigError("mi-oracle supports only --env ring", "env");
  const JointDistribution j = ring_policy_joint(RingMdp{});
  std::printf("I(s;z)=%s  I(s,a;z)=%s\n", format_fixed4(mi_oracle(j, MiMode::S_Z)).c_str(),
              format_fixed4(mi_oracle(j, MiMode::SA_Z)).c_str());
  return kExitOk;
}

int cmd_gradcheck(std::uint64_t seed) {
  bool ok = true;
  for (const auto& c : run_gradcheck_suite(seed)) {
    const bool pass = c.max_rel_error < 1e-4;
    ok = ok && pass;
    std::printf("%-9s max_rel_error %.3e  %s\n", c.loss.c_str(), c.max_rel_error, pass ? "ok" : "FAIL");
  }
  return ok ? kExitOk : kExitNumeric;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

int cmd_sweep(const ConfigOptions& co, const std::vector<std::string>& grid, const std::string& seeds,
              std::size_t workers, const std::string& out) {
  const RunConfig base = co.resolve();
  std::vector<RunConfig> configs{base};
  for (const auto& axis : grid) {
    const auto eq = axis.find('=');
    if (eq == std::string::npos) throw ConfigError("--grid expects key=v1,v2,...", axis);
    const std::string key = axis.substr(0, eq);
    std::vector<RunConfig> next;
    for (const auto& c : configs)
      for (const auto& v : split(axis.substr(eq + 1), ',')) {
        RunConfig n = c;
        set_config_value(n, key, v);
        next.push_back(std::move(n));
      }
    configs = std::move(next);
  }
  if (!seeds.empty()) {
    std::vector<RunConfig> next;
    for (const auto& c : configs)
      for (const auto& s : split(seeds, ',')) {
        RunConfig n = c;
        set_config_value(n, "seed", s);
        next.push_back(std::move(n));
      }
    configs = std::move(next);
  }
  const auto axes = sweep_axes(configs);
  for (auto& c : configs) {
    std::string dir = sweep_label(c, axes);
    std::replace(dir.begin(), dir.end(), ';', '_');
    c.out_dir = (std::filesystem::path(base.out_dir) / (dir + "_seed" + std::to_string(c.seed))).string();
    validate_config(c);
  }
  const SweepReport rep = sweep(configs, workers);
  const std::string csv = sweep_csv(rep);
  if (!out.empty()) {
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot write '" + out + "'");
    os << csv;
  } else {
    std::cout << csv;
  }
  for (const auto& r : rep.runs)
    if (!r.ok) std::fprintf(stderr, "run %s seed %llu failed: %s\n", r.label.c_str(),
                            static_cast<unsigned long long>(r.config.seed), r.error.c_str());
  std::fprintf(stderr, "%zu runs, %zu failed\n", rep.runs.size(), rep.failures());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent-conditioned TD3: training, evaluation and diagnostics"};
  app.require_subcommand(1);

  ConfigOptions train_o, eval_o, div_o, fs_o, sweep_o;
  std::string ckpt, out, log, env = "ring", seeds;
  std::size_t latents = 8, workers = 1;
  std::uint64_t gc_seed = 0;
  bool force = false;
  std::vector<std::string> grid;

  auto* train = app.add_subcommand("train", "train one run");
  train_o.attach(train);

  auto* eval = app.add_subcommand("eval", "per-latent deterministic returns of a checkpoint");
  eval_o.attach(eval);
  eval->add_option("--checkpoint", ckpt, "checkpoint file")->required();
  eval->add_option("--latents", latents, "number of latents in the grid");
  eval->add_option("--out", out, "CSV output path");
  eval->add_flag("--force", force, "ignore config hash mismatch");

  auto* div = app.add_subcommand("diversity", "diversity score of a checkpoint");
  div_o.attach(div);
  div->add_option("--checkpoint", ckpt, "checkpoint file")->required();
  div->add_option("--out", out, "embedding CSV output path");
  div->add_flag("--force", force, "ignore config hash mismatch");

  auto* fs = app.add_subcommand("fewshot", "few-shot latent selection on the test variant");
  fs_o.attach(fs);
  fs->add_option("--checkpoint", ckpt, "checkpoint file")->required();
  fs->add_option("--log", log, "episode log CSV");
  fs->add_flag("--force", force, "ignore config hash mismatch");

  auto* mi = app.add_subcommand("mi-oracle", "exact MI of the two-policy ring construction");
  mi->add_option("--env", env, "environment (ring)");

  auto* gc = app.add_subcommand("gradcheck", "finite-difference check of all agent losses");
  gc->add_option("--seed", gc_seed, "seed");

  auto* sw = app.add_subcommand("sweep", "grid of runs with an aggregate CSV");
  sweep_o.attach(sw);
  sw->add_option("--grid", grid, "axis as key=v1,v2,... (repeatable)");
  sw->add_option("--seeds", seeds, "comma separated seeds");
  sw->add_option("--workers", workers, "worker threads");
  sw->add_option("--out", out, "aggregate CSV path (stdout if empty)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*train) return cmd_train(train_o);
    if (*eval) return cmd_eval(eval_o, ckpt, latents, out, force);
    if (*div) return cmd_diversity(div_o, ckpt, out, force);
    if (*fs) return cmd_fewshot(fs_o, ckpt, log, force);
    if (*mi) return cmd_mi_oracle(env);
    if (*gc) return cmd_gradcheck(gc_seed);
    if (*sw) return cmd_sweep(sweep_o, grid, seeds, workers, out);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error%s%s: %s\n", e.key().empty() ? "" : " [", e.key().empty() ? "" : (e.key() + "]").c_str(),
                 e.what());
    return kExitConfig;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}
