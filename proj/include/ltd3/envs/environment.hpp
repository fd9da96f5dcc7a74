#pragma once

#include <variant>

#include "ltd3/envs/point_vel.hpp"
#include "ltd3/envs/ring_mdp.hpp"

namespace ltd3 {

/// Closed set of environments behind one value-type interface.
class Environment {
 public:
  Environment(RingMdp env) : env_(std::move(env)) {}     // NOLINT(implicit)
  Environment(PointVel env) : env_(std::move(env)) {}    // NOLINT(implicit)

  EnvSpec spec() const {
    return std::visit([](const auto& e) { return e.spec(); }, env_);
  }
  EnvState reset(Rng& rng) const {
    return std::visit([&](const auto& e) { return e.reset(rng); }, env_);
  }
  StepResult step(const EnvState& s, const std::vector<double>& a) const {
    return std::visit([&](const auto& e) { return e.step(s, a); }, env_);
  }

  bool is_ring() const { return std::holds_alternative<RingMdp>(env_); }
  const RingMdp* ring() const { return std::get_if<RingMdp>(&env_); }
  const PointVel* point_vel() const { return std::get_if<PointVel>(&env_); }

 private:
  std::variant<RingMdp, PointVel> env_;
};

}  // namespace ltd3
