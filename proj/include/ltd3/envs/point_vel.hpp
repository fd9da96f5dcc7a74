#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <variant>

#include "ltd3/envs/env.hpp"
#include "ltd3/errors.hpp"
#include "ltd3/numerics/rng.hpp"

namespace ltd3 {

/// Unmodified training dynamics.
struct PointVelTrain {};
/// Penalty charged on every step that ends with y inside [y_low, y_high].
struct PointVelBlocked {
  double y_low = -2.5;
  double y_high = 2.5;
  double penalty = 1.0;
};
/// Constant lateral force added to the y velocity before integration.
struct PointVelDrift {
  double lateral_force = 1.0;
};

using PointVelVariant = std::variant<PointVelTrain, PointVelBlocked, PointVelDrift>;

struct PointVelConfig {
  double v_max = 1.0;
  double dt = 0.05;
  double ctrl_cost = 0.05;
  double accel_gain = 4.0;
  double speed_limit = 2.0;
  std::size_t horizon = 200;
  PointVelVariant variant = PointVelTrain{};

  void validate() const {
    if (!(v_max > 0.0)) throw ConfigError("pointvel: v_max must be > 0", "pv_v_max");
    if (!(speed_limit >= v_max))
      throw ConfigError("pointvel: speed_limit must be >= v_max", "pv_speed_limit");
    if (!(dt > 0.0)) throw ConfigError("pointvel: dt must be > 0", "pv_dt");
    if (horizon < 1) throw ConfigError("pointvel: horizon must be >= 1", "pv_horizon");
    if (ctrl_cost < 0.0) throw ConfigError("pointvel: ctrl_cost must be >= 0", "pv_ctrl_cost");
    if (const auto* b = std::get_if<PointVelBlocked>(&variant); b && !(b->y_low <= b->y_high))
      throw ConfigError("pointvel: block band must satisfy y_low <= y_high", "pv_block_y_low");
  }
};

/// Planar point mass. Forward progress pays min(dx/dt, v_max) per step, so
/// the optimal return is pinned while the y coordinate and the control style
/// remain free. Internal state: (x, y, vx, vy); observation: (y, vx, vy).
class PointVel {
 public:
  static constexpr std::size_t kObsDim = 3;

  explicit PointVel(PointVelConfig cfg = {}) : cfg_(std::move(cfg)) { cfg_.validate(); }

  const PointVelConfig& config() const { return cfg_; }

  EnvSpec spec() const {
    EnvSpec s;
    s.state_dim = kObsDim;
    s.action_dim = 2;
    s.action_low = {-1.0, -1.0};
    s.action_high = {1.0, 1.0};
    s.horizon = cfg_.horizon;
    s.dt = cfg_.dt;
    return s;
  }

  EnvState make_state(double x, double y, double vx, double vy, std::size_t t) const {
    EnvState s;
    s.internal = {x, y, vx, vy};
    s.observation = {y, vx, vy};
    s.time_step = t;
    s.terminated = t >= cfg_.horizon;
    return s;
  }

  /// pos = (0, y0), y0 ~ U[-0.1, 0.1], at rest.
  EnvState reset(Rng& rng) const {
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    return make_state(0.0, u(rng), 0.0, 0.0, 0);
  }

  StepResult step(const EnvState& s, const std::vector<double>& action) const {
    if (s.terminated) throw StateError("pointvel_step: episode already terminated");
    if (action.size() != 2) throw DimensionError("pointvel_step: expected 2 action dimensions");
    StepResult r;
    double a[2];
    for (int i = 0; i < 2; ++i) {
      if (!std::isfinite(action[i])) throw NumericError("pointvel_step: non-finite action");
      a[i] = std::clamp(action[i], -1.0, 1.0);
      if (a[i] != action[i]) r.action_clipped = true;
    }
    const double x = s.internal[0], y = s.internal[1];
    double vx = s.internal[2] + cfg_.accel_gain * a[0] * cfg_.dt;
    double vy = s.internal[3] + cfg_.accel_gain * a[1] * cfg_.dt;
    if (const auto* d = std::get_if<PointVelDrift>(&cfg_.variant)) vy += d->lateral_force * cfg_.dt;
    vx = std::clamp(vx, -cfg_.speed_limit, cfg_.speed_limit);
    vy = std::clamp(vy, -cfg_.speed_limit, cfg_.speed_limit);
    const double nx = x + vx * cfg_.dt;
    const double ny = y + vy * cfg_.dt;
    if (!std::isfinite(nx) || !std::isfinite(ny)) throw NumericError("pointvel_step: non-finite state");

    double reward = std::min((nx - x) / cfg_.dt, cfg_.v_max) -
                    cfg_.ctrl_cost * (a[0] * a[0] + a[1] * a[1]);
    if (const auto* b = std::get_if<PointVelBlocked>(&cfg_.variant)) {
      if (ny >= b->y_low && ny <= b->y_high) reward -= b->penalty;
    }
    r.next = make_state(nx, ny, vx, vy, s.time_step + 1);
    r.reward = reward;
    return r;
  }

 private:
  PointVelConfig cfg_;
};

/// Return of the scripted controller "full +x thrust until vx reaches v_max,
/// then zero action" from y0 = 0. Used as R* for gating and competence checks.
inline double pointvel_scripted_return(const PointVelConfig& cfg) {
  PointVel env(cfg);
  EnvState s = env.make_state(0.0, 0.0, 0.0, 0.0, 0);
  double ret = 0.0;
  while (!s.terminated) {
    const bool thrust = s.internal[2] < cfg.v_max;
    StepResult r = env.step(s, {thrust ? 1.0 : 0.0, 0.0});
    ret += r.reward;
    s = std::move(r.next);
  }
  return ret;
}

}  // namespace ltd3
