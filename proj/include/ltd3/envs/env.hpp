#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace ltd3 {

struct EnvSpec {
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  std::vector<double> action_low;
  std::vector<double> action_high;
  std::size_t horizon = 1;
  std::optional<std::size_t> discrete_actions;
  double dt = 0.0;

  double half_range(std::size_t i) const { return 0.5 * (action_high[i] - action_low[i]); }
  double center(std::size_t i) const { return 0.5 * (action_high[i] + action_low[i]); }
};

/// Observable state plus the environment's internal coordinates. Value type;
/// stepping never mutates its input.
struct EnvState {
  std::vector<double> observation;
  std::vector<double> internal;
  std::size_t time_step = 0;
  bool terminated = false;
};

struct StepResult {
  EnvState next;
  double reward = 0.0;
  /// Environment-intrinsic termination. Horizon truncation sets
  /// `next.terminated` but leaves this false.
  bool done = false;
  bool action_clipped = false;
};

}  // namespace ltd3
