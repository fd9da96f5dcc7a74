#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "ltd3/numerics/matrix.hpp"

namespace ltd3 {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Moment buffers mirroring a fixed list of parameter tensors.
struct AdamState {
  AdamConfig config;
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::uint64_t t = 0;

  AdamState() = default;

  AdamState(std::span<const Matrix* const> params, AdamConfig cfg) : config(cfg) {
    m.reserve(params.size());
    v.reserve(params.size());
    for (const Matrix* p : params) {
      m.push_back(Matrix::Zero(p->rows(), p->cols()));
      v.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  }

  AdamState(std::span<Matrix* const> params, AdamConfig cfg) : config(cfg) {
    for (const Matrix* p : params) {
      m.push_back(Matrix::Zero(p->rows(), p->cols()));
      v.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  }
};

/// One bias-corrected Adam step. With `maximize` the gradient is ascended.
/// Non-finite gradients abort the step before anything is modified.
inline void adam_step(AdamState& state, std::span<Matrix* const> params,
                      std::span<const Matrix> grads, bool maximize) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw DimensionError("adam_step: parameter/gradient/state count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    require_shape(grads[i], params[i]->rows(), params[i]->cols(), "adam_step gradient");
    require_shape(state.m[i], params[i]->rows(), params[i]->cols(), "adam_step state");
    require_finite(grads[i], "adam_step gradient");
  }
  const AdamConfig& c = state.config;
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  const double sign = maximize ? 1.0 : -1.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto g = grads[i].array();
    state.m[i].array() = c.beta1 * state.m[i].array() + (1.0 - c.beta1) * g;
    state.v[i].array() = c.beta2 * state.v[i].array() + (1.0 - c.beta2) * g.square();
    params[i]->array() += sign * c.lr * (state.m[i].array() / bc1) /
                          ((state.v[i].array() / bc2).sqrt() + c.eps);
  }
}

}  // namespace ltd3
