#pragma once

#include <algorithm>
#include <random>
#include <set>
#include <string>

#include "ltd3/envs/env.hpp"
#include "ltd3/errors.hpp"
#include "ltd3/numerics/rng.hpp"

namespace ltd3 {

struct RingMdpConfig {
  std::size_t n_states = 4;
  std::set<std::size_t> reward_states{0, 3};
  std::size_t horizon = 16;

  void validate() const {
    if (n_states < 2) throw ConfigError("ring: n_states must be >= 2", "ring_n_states");
    if (horizon < 1) throw ConfigError("ring: horizon must be >= 1", "ring_horizon");
    for (auto s : reward_states)
      if (s >= n_states) throw ConfigError("ring: reward state out of range", "ring_reward_states");
  }
};

enum class RingAction { Cw, Ccw };

/// n states on a cycle, two actions. Clockwise-everywhere and
/// counter-clockwise-everywhere visit every state equally often and earn
/// identical returns while disagreeing on the action in every state.
class RingMdp {
 public:
  explicit RingMdp(RingMdpConfig cfg = {}) : cfg_(std::move(cfg)) { cfg_.validate(); }

  const RingMdpConfig& config() const { return cfg_; }

  /// Continuous interface: one action dimension in [-1, 1], sign selects the
  /// direction (>= 0 is clockwise). Observation is the one-hot state index.
  EnvSpec spec() const {
    EnvSpec s;
    s.state_dim = cfg_.n_states;
    s.action_dim = 1;
    s.action_low = {-1.0};
    s.action_high = {1.0};
    s.horizon = cfg_.horizon;
    s.discrete_actions = 2;
    return s;
  }

  EnvState state_at(std::size_t index, std::size_t time_step = 0) const {
    EnvState st;
    st.observation.assign(cfg_.n_states, 0.0);
    st.observation[index] = 1.0;
    st.internal = {static_cast<double>(index)};
    st.time_step = time_step;
    st.terminated = time_step >= cfg_.horizon;
    return st;
  }

  static std::size_t index_of(const EnvState& s) { return static_cast<std::size_t>(s.internal.at(0)); }

  EnvState reset(Rng& rng) const {
    std::uniform_int_distribution<std::size_t> u(0, cfg_.n_states - 1);
    return state_at(u(rng));
  }

  std::size_t next_index(std::size_t index, RingAction a) const {
    return a == RingAction::Cw ? (index + 1) % cfg_.n_states
                               : (index + cfg_.n_states - 1) % cfg_.n_states;
  }

  StepResult step(const EnvState& s, RingAction a) const {
    if (s.terminated) throw StateError("ring_step: episode already terminated");
    const std::size_t nxt = next_index(index_of(s), a);
    StepResult r;
    r.next = state_at(nxt, s.time_step + 1);
    r.reward = cfg_.reward_states.count(nxt) ? 1.0 : 0.0;
    return r;
  }

  static RingAction decode(double a) { return a >= 0.0 ? RingAction::Cw : RingAction::Ccw; }
  static double encode(RingAction a) { return a == RingAction::Cw ? 1.0 : -1.0; }

  StepResult step(const EnvState& s, const std::vector<double>& action) const {
    if (action.size() != 1) throw DimensionError("ring_step: expected one action dimension");
    StepResult r = step(s, decode(action[0]));
    r.action_clipped = action[0] < -1.0 || action[0] > 1.0;
    return r;
  }

 private:
  RingMdpConfig cfg_;
};

}  // namespace ltd3
