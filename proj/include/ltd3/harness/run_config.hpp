#pragma once

#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ltd3/agent/config.hpp"
#include "ltd3/agent/latent.hpp"
#include "ltd3/envs/environment.hpp"
#include "ltd3/harness/format.hpp"
#include "ltd3/numerics/rng.hpp"

namespace ltd3 {

struct FewShotConfig {
  std::size_t budget = 8;
  std::size_t final_eval_episodes = 5;
  std::string test_variant = "blocked";

  void validate(const LatentSpec& latent) const {
    if (budget < 1) throw ConfigError("fewshot budget must be >= 1", "fs_budget");
    if (final_eval_episodes < 1)
      throw ConfigError("fs_final_episodes must be >= 1", "fs_final_episodes");
    // Purely discrete latents are enumerated, so every class needs one episode.
    if (latent.cont_dim == 0 && latent.has_disc() && budget < latent.disc_k)
      throw ConfigError("fewshot budget " + std::to_string(budget) + " cannot cover " +
                            std::to_string(latent.disc_k) + " latent classes",
                        "fs_budget");
  }
};

/// Everything that determines a run. Serializes to a flat key=value text
/// whose hash identifies checkpoints (out_dir excluded).
struct RunConfig {
  std::string env = "pointvel";

  PointVelConfig pv{};
  std::string pv_variant = "train";
  PointVelBlocked pv_blocked{};
  PointVelDrift pv_drift{};

  RingMdpConfig ring{};

  LatentSpec latent{};
  Ltd3Config agent{};
  std::uint64_t seed = 0;

  std::size_t eval_interval = 5000;
  std::size_t eval_episodes = 10;
  std::size_t diversity_latents = 8;
  std::size_t diversity_episodes = 1;
  double diversity_h = 0.1;
  std::size_t mi_samples = 2000;
  std::size_t checkpoint_interval = 50000;
  std::string out_dir = "runs/default";

  FewShotConfig fewshot{};
};

struct ConfigField {
  std::string key;
  std::string help;
  std::function<std::string(RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

namespace detail {

template <class F>
ConfigField real_field(std::string key, std::string help, F ref) {
  return {key, std::move(help), [ref](RunConfig& c) { return format_full(ref(c)); },
          [ref, key](RunConfig& c, std::string_view v) { ref(c) = parse_double(v, key); }};
}

template <class F>
ConfigField count_field(std::string key, std::string help, F ref) {
  return {key, std::move(help), [ref](RunConfig& c) { return std::to_string(ref(c)); },
          [ref, key](RunConfig& c, std::string_view v) {
            ref(c) = static_cast<std::remove_reference_t<decltype(ref(c))>>(parse_count(v, key));
          }};
}

template <class F>
ConfigField text_field(std::string key, std::string help, F ref) {
  return {key, std::move(help), [ref](RunConfig& c) { return std::string(ref(c)); },
          [ref](RunConfig& c, std::string_view v) { ref(c) = std::string(v); }};
}

inline std::string join_states(const std::set<std::size_t>& s) {
  std::string out;
  for (auto i : s) out += (out.empty() ? "" : ",") + std::to_string(i);
  return out;
}

}  // namespace detail

/// The schema in canonical order.
inline const std::vector<ConfigField>& config_schema() {
  using detail::count_field;
  using detail::real_field;
  using detail::text_field;
  static const std::vector<ConfigField> schema = {
      text_field("env", "environment: pointvel | ring", [](RunConfig& c) -> std::string& { return c.env; }),
      text_field("pv_variant", "training variant: train | blocked | drift",
                 [](RunConfig& c) -> std::string& { return c.pv_variant; }),
      real_field("pv_v_max", "forward speed cap paid as reward", [](RunConfig& c) -> double& { return c.pv.v_max; }),
      real_field("pv_dt", "integration step (s)", [](RunConfig& c) -> double& { return c.pv.dt; }),
      real_field("pv_ctrl_cost", "control cost coefficient", [](RunConfig& c) -> double& { return c.pv.ctrl_cost; }),
      real_field("pv_accel_gain", "acceleration per unit action", [](RunConfig& c) -> double& { return c.pv.accel_gain; }),
      real_field("pv_speed_limit", "velocity clamp", [](RunConfig& c) -> double& { return c.pv.speed_limit; }),
      count_field("pv_horizon", "episode length", [](RunConfig& c) -> std::size_t& { return c.pv.horizon; }),
      real_field("pv_block_y_low", "blocked band lower edge", [](RunConfig& c) -> double& { return c.pv_blocked.y_low; }),
      real_field("pv_block_y_high", "blocked band upper edge", [](RunConfig& c) -> double& { return c.pv_blocked.y_high; }),
      real_field("pv_block_penalty", "per-step penalty inside the band",
                 [](RunConfig& c) -> double& { return c.pv_blocked.penalty; }),
      real_field("pv_drift_force", "lateral force of the drift variant",
                 [](RunConfig& c) -> double& { return c.pv_drift.lateral_force; }),
      count_field("ring_n_states", "ring size", [](RunConfig& c) -> std::size_t& { return c.ring.n_states; }),
      count_field("ring_horizon", "ring episode length", [](RunConfig& c) -> std::size_t& { return c.ring.horizon; }),
      {"ring_reward_states", "comma separated rewarding ring states",
       [](RunConfig& c) { return detail::join_states(c.ring.reward_states); },
       [](RunConfig& c, std::string_view v) {
         std::set<std::size_t> s;
         while (!v.empty()) {
           const auto p = v.find(',');
           const auto tok = trim(v.substr(0, p));
           if (!tok.empty()) s.insert(parse_count(tok, "ring_reward_states"));
           v = p == std::string_view::npos ? std::string_view{} : v.substr(p + 1);
         }
         c.ring.reward_states = std::move(s);
       }},
      count_field("latent_cont_dim", "continuous latent dimensions", [](RunConfig& c) -> std::size_t& { return c.latent.cont_dim; }),
      count_field("latent_disc_k", "discrete latent classes (0 = none)", [](RunConfig& c) -> std::size_t& { return c.latent.disc_k; }),
      {"mode", "ltd3 | td3 | td3_diayn_s | td3_diayn_sa | smerl_gate",
       [](RunConfig& c) { return std::string(to_string(c.agent.mode)); },
       [](RunConfig& c, std::string_view v) { c.agent.mode = parse_baseline_mode(std::string(v)); }},
      real_field("gamma", "discount", [](RunConfig& c) -> double& { return c.agent.gamma; }),
      real_field("lr", "Adam learning rate", [](RunConfig& c) -> double& { return c.agent.lr; }),
      count_field("batch", "minibatch size", [](RunConfig& c) -> std::size_t& { return c.agent.batch; }),
      real_field("tau", "target smoothing", [](RunConfig& c) -> double& { return c.agent.tau; }),
      real_field("c_clip", "importance weight clip", [](RunConfig& c) -> double& { return c.agent.c_clip; }),
      count_field("d_atr", "actor and target update interval", [](RunConfig& c) -> std::size_t& { return c.agent.d_atr; }),
      count_field("d_info", "info update interval", [](RunConfig& c) -> std::size_t& { return c.agent.d_info; }),
      real_field("explore_sigma", "exploration noise (fraction of half range)",
                 [](RunConfig& c) -> double& { return c.agent.explore_sigma; }),
      real_field("target_sigma", "target policy noise (fraction of half range)",
                 [](RunConfig& c) -> double& { return c.agent.target_sigma; }),
      real_field("target_noise_clip", "target noise clip (fraction of half range)",
                 [](RunConfig& c) -> double& { return c.agent.target_noise_clip; }),
      real_field("alpha_info", "weight of the info objective", [](RunConfig& c) -> double& { return c.agent.alpha_info; }),
      count_field("warmup_steps", "uniform random steps before learning",
                  [](RunConfig& c) -> std::size_t& { return c.agent.warmup_steps; }),
      count_field("total_steps", "environment steps", [](RunConfig& c) -> std::size_t& { return c.agent.total_steps; }),
      real_field("beta_intrinsic", "intrinsic reward scale (baselines)",
                 [](RunConfig& c) -> double& { return c.agent.beta_intrinsic; }),
      real_field("eps_smerl", "SMERL return margin", [](RunConfig& c) -> double& { return c.agent.eps_smerl; }),
      real_field("r_star", "SMERL optimal return (nan = environment oracle)",
                 [](RunConfig& c) -> double& { return c.agent.r_star; }),
      count_field("hidden", "hidden units per layer", [](RunConfig& c) -> std::size_t& { return c.agent.hidden; }),
      count_field("hidden_layers", "hidden layers", [](RunConfig& c) -> std::size_t& { return c.agent.hidden_layers; }),
      count_field("embed_dim", "latent embedding width", [](RunConfig& c) -> std::size_t& { return c.agent.embed_dim; }),
      real_field("posterior_log_std_min", "posterior log-std floor",
                 [](RunConfig& c) -> double& { return c.agent.posterior_log_std_min; }),
      count_field("buffer_capacity", "replay capacity", [](RunConfig& c) -> std::size_t& { return c.agent.buffer_capacity; }),
      count_field("seed", "master seed", [](RunConfig& c) -> std::uint64_t& { return c.seed; }),
      count_field("eval_interval", "steps between evaluations", [](RunConfig& c) -> std::size_t& { return c.eval_interval; }),
      count_field("eval_episodes", "deterministic episodes per evaluation",
                  [](RunConfig& c) -> std::size_t& { return c.eval_episodes; }),
      count_field("diversity_latents", "policies per diversity score",
                  [](RunConfig& c) -> std::size_t& { return c.diversity_latents; }),
      count_field("diversity_episodes", "episodes per behavior embedding",
                  [](RunConfig& c) -> std::size_t& { return c.diversity_episodes; }),
      real_field("diversity_h", "kernel length scale", [](RunConfig& c) -> double& { return c.diversity_h; }),
      count_field("mi_samples", "recent transitions for the MI bound", [](RunConfig& c) -> std::size_t& { return c.mi_samples; }),
      count_field("checkpoint_interval", "steps between checkpoints (0 = first and last only)",
                  [](RunConfig& c) -> std::size_t& { return c.checkpoint_interval; }),
      text_field("out_dir", "artifact directory", [](RunConfig& c) -> std::string& { return c.out_dir; }),
      count_field("fs_budget", "few-shot budget k (episodes)", [](RunConfig& c) -> std::size_t& { return c.fewshot.budget; }),
      count_field("fs_final_episodes", "few-shot final evaluation episodes",
                  [](RunConfig& c) -> std::size_t& { return c.fewshot.final_eval_episodes; }),
      text_field("fs_variant", "few-shot test variant: train | blocked | drift",
                 [](RunConfig& c) -> std::string& { return c.fewshot.test_variant; }),
  };
  return schema;
}

inline const ConfigField& config_field(std::string_view key) {
  for (const auto& f : config_schema())
    if (f.key == key) return f;
  throw ConfigError("unknown config key '" + std::string(key) + "'", std::string(key));
}

inline void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
  config_field(key).set(cfg, trim(value));
}

inline std::string get_config_value(const RunConfig& cfg, std::string_view key) {
  RunConfig copy = cfg;
  return config_field(key).get(copy);
}

/// Apply `key = value` lines onto `cfg`. '#' starts a comment.
inline void apply_config_text(RunConfig& cfg, std::string_view text, const std::string& origin = "config") {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key=value", std::string(line));
    set_config_value(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

inline RunConfig load_config_file(const std::string& path, RunConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'", path);
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(base, ss.str(), path);
  return base;
}

/// Canonical text: every key in schema order, one per line.
inline std::string serialize_config(const RunConfig& cfg, bool include_out_dir = true) {
  RunConfig copy = cfg;
  std::string out;
  for (const auto& f : config_schema()) {
    if (!include_out_dir && f.key == "out_dir") continue;
    out += f.key + "=" + f.get(copy) + "\n";
  }
  return out;
}

inline std::uint64_t config_hash(const RunConfig& cfg) {
  return fnv1a64(serialize_config(cfg, false));
}

inline PointVelConfig pointvel_config(const RunConfig& cfg, const std::string& variant) {
  PointVelConfig pc = cfg.pv;
  if (variant == "train") pc.variant = PointVelTrain{};
  else if (variant == "blocked") pc.variant = cfg.pv_blocked;
  else if (variant == "drift") pc.variant = cfg.pv_drift;
  else throw ConfigError("unknown pointvel variant '" + variant + "'", "pv_variant");
  return pc;
}

inline Environment make_environment(const RunConfig& cfg, const std::string& variant) {
  if (cfg.env == "ring") return RingMdp(cfg.ring);
  if (cfg.env == "pointvel") return PointVel(pointvel_config(cfg, variant));
  throw ConfigError("unknown env '" + cfg.env + "'", "env");
}

inline Environment make_train_environment(const RunConfig& cfg) { return make_environment(cfg, cfg.pv_variant); }

inline void validate_config(const RunConfig& cfg) {
  cfg.agent.validate();
  cfg.latent.validate();
  cfg.fewshot.validate(cfg.latent);
  (void)make_train_environment(cfg);
  if (cfg.env == "pointvel") (void)pointvel_config(cfg, cfg.fewshot.test_variant);
  if (cfg.eval_interval < 1) throw ConfigError("eval_interval must be >= 1", "eval_interval");
  if (cfg.eval_episodes < 1) throw ConfigError("eval_episodes must be >= 1", "eval_episodes");
  if (cfg.diversity_latents < 1) throw ConfigError("diversity_latents must be >= 1", "diversity_latents");
  if (cfg.diversity_episodes < 1) throw ConfigError("diversity_episodes must be >= 1", "diversity_episodes");
  if (!(cfg.diversity_h > 0.0)) throw ConfigError("diversity_h must be > 0", "diversity_h");
  if (cfg.mi_samples < 1) throw ConfigError("mi_samples must be >= 1", "mi_samples");
}

}  // namespace ltd3
