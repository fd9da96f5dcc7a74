#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "ltd3/errors.hpp"

namespace ltd3 {

enum class BaselineMode { Ltd3, Td3, Td3DiaynS, Td3DiaynSA, SmerlGate };

inline const char* to_string(BaselineMode m) {
  switch (m) {
    case BaselineMode::Ltd3: return "ltd3";
    case BaselineMode::Td3: return "td3";
    case BaselineMode::Td3DiaynS: return "td3_diayn_s";
    case BaselineMode::Td3DiaynSA: return "td3_diayn_sa";
    case BaselineMode::SmerlGate: return "smerl_gate";
  }
  return "?";
}

inline BaselineMode parse_baseline_mode(const std::string& s) {
  for (auto m : {BaselineMode::Ltd3, BaselineMode::Td3, BaselineMode::Td3DiaynS,
                 BaselineMode::Td3DiaynSA, BaselineMode::SmerlGate})
    if (s == to_string(m)) return m;
  throw ConfigError("unknown mode '" + s + "'", "mode");
}

/// Learner hyperparameters. Defaults follow the published TD3/LTD3 tables;
/// noise magnitudes are in action units for a unit box.
struct Ltd3Config {
  double gamma = 0.99;
  double lr = 3e-4;
  std::size_t batch = 256;
  double tau = 0.005;
  double c_clip = 0.3;
  std::size_t d_atr = 2;
  std::size_t d_info = 4;
  double explore_sigma = 0.1;
  double target_sigma = 0.2;
  double target_noise_clip = 0.5;
  double alpha_info = 1.0;
  std::size_t warmup_steps = 1000;
  std::size_t total_steps = 200000;
  BaselineMode mode = BaselineMode::Ltd3;
  double beta_intrinsic = 0.5;
  double eps_smerl = 0.1;
  double r_star = std::numeric_limits<double>::quiet_NaN();  // NaN: derive from env oracle

  // Architecture.
  std::size_t hidden = 256;
  std::size_t hidden_layers = 2;
  std::size_t embed_dim = 16;
  /// Floor of the posterior's Gaussian log standard deviation.
  double posterior_log_std_min = -5.0;
  std::size_t buffer_capacity = 1000000;

  void validate() const {
    if (!(c_clip > 0.0)) throw ConfigError("c_clip must be > 0", "c_clip");
    if (d_atr < 1) throw ConfigError("d_atr must be >= 1", "d_atr");
    if (d_info < 1) throw ConfigError("d_info must be >= 1", "d_info");
    if (batch < 1) throw ConfigError("batch must be >= 1", "batch");
    if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in [0, 1]", "tau");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]", "gamma");
    if (!(lr > 0.0)) throw ConfigError("lr must be > 0", "lr");
    if (explore_sigma < 0.0) throw ConfigError("explore_sigma must be >= 0", "explore_sigma");
    if (target_sigma < 0.0) throw ConfigError("target_sigma must be >= 0", "target_sigma");
    if (target_noise_clip < 0.0)
      throw ConfigError("target_noise_clip must be >= 0", "target_noise_clip");
    if (hidden < 1) throw ConfigError("hidden must be >= 1", "hidden");
    if (embed_dim < 1) throw ConfigError("embed_dim must be >= 1", "embed_dim");
    if (!(posterior_log_std_min < 2.0))
      throw ConfigError("posterior_log_std_min must be < 2", "posterior_log_std_min");
    if (buffer_capacity < 1) throw ConfigError("buffer_capacity must be >= 1", "buffer_capacity");
  }
};

}  // namespace ltd3
