#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ltd3/numerics/matrix.hpp"
#include "ltd3/numerics/rng.hpp"

namespace ltd3 {

enum class Activation { Linear, Relu, Tanh };

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::Linear: return "linear";
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
  }
  return "?";
}

/// Fully connected network: `hidden` activation on every layer but the last,
/// `output` activation on the last.
struct MlpParams {
  std::vector<std::size_t> layer_sizes;
  std::vector<Matrix> weights;  // weights[i]: layer_sizes[i+1] x layer_sizes[i]
  std::vector<Matrix> biases;   // biases[i]:  layer_sizes[i+1] x 1
  Activation hidden = Activation::Relu;
  Activation output = Activation::Linear;

  std::size_t num_layers() const { return weights.size(); }
  std::size_t input_dim() const { return layer_sizes.front(); }
  std::size_t output_dim() const { return layer_sizes.back(); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i)
      n += layer_sizes[i + 1] * (layer_sizes[i] + 1);
    return n;
  }

  /// Tensors in canonical order W0, b0, W1, b1, ...
  std::vector<Matrix*> tensors() {
    std::vector<Matrix*> out;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      out.push_back(&weights[i]);
      out.push_back(&biases[i]);
    }
    return out;
  }
  std::vector<const Matrix*> tensors() const {
    std::vector<const Matrix*> out;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      out.push_back(&weights[i]);
      out.push_back(&biases[i]);
    }
    return out;
  }

  /// Zero-initialized parameters of the given architecture.
  static MlpParams zeros(std::vector<std::size_t> sizes,
                         Activation output = Activation::Linear,
                         Activation hidden = Activation::Relu) {
    if (sizes.size() < 2) throw DimensionError("MlpParams: need at least input and output size");
    MlpParams p;
    p.layer_sizes = std::move(sizes);
    p.hidden = hidden;
    p.output = output;
    for (std::size_t i = 0; i + 1 < p.layer_sizes.size(); ++i) {
      const auto out = static_cast<Eigen::Index>(p.layer_sizes[i + 1]);
      const auto in = static_cast<Eigen::Index>(p.layer_sizes[i]);
      p.weights.push_back(Matrix::Zero(out, in));
      p.biases.push_back(Matrix::Zero(out, 1));
    }
    return p;
  }

  /// Uniform(+-1/sqrt(fan_in)) initialization for weights and biases.
  static MlpParams random(std::vector<std::size_t> sizes, Rng& rng,
                          Activation output = Activation::Linear,
                          Activation hidden = Activation::Relu) {
    MlpParams p = zeros(std::move(sizes), output, hidden);
    for (std::size_t i = 0; i < p.weights.size(); ++i) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(p.layer_sizes[i]));
      std::uniform_real_distribution<double> u(-bound, bound);
      for (Eigen::Index k = 0; k < p.weights[i].size(); ++k) p.weights[i].data()[k] = u(rng);
      for (Eigen::Index k = 0; k < p.biases[i].size(); ++k) p.biases[i].data()[k] = u(rng);
    }
    return p;
  }
};

/// Intermediates of one forward pass. `inputs[i]` feeds layer i, `outputs[i]`
/// is its post-activation.
struct MlpTape {
  std::vector<Matrix> inputs;
  std::vector<Matrix> outputs;
  std::size_t batch = 0;
};

namespace detail {

inline void apply_activation(Activation act, Matrix& m) {
  switch (act) {
    case Activation::Linear: break;
    case Activation::Relu: m = m.cwiseMax(0.0); break;
    case Activation::Tanh: m = m.array().tanh().matrix(); break;
  }
}

// d act / d pre expressed through the post-activation value.
inline void scale_by_derivative(Activation act, const Matrix& post, Matrix& grad) {
  switch (act) {
    case Activation::Linear: break;
    case Activation::Relu: grad = (post.array() > 0.0).select(grad, 0.0); break;
    case Activation::Tanh: grad.array() *= 1.0 - post.array().square(); break;
  }
}

}  // namespace detail

/// Forward pass over a batch (one sample per row).
inline std::pair<Matrix, MlpTape> mlp_forward(const MlpParams& params, const Matrix& input) {
  if (static_cast<std::size_t>(input.cols()) != params.input_dim()) {
    throw DimensionError("mlp_forward: input has " + std::to_string(input.cols()) +
                         " columns, network expects " + std::to_string(params.input_dim()));
  }
  MlpTape tape;
  tape.batch = static_cast<std::size_t>(input.rows());
  tape.inputs.reserve(params.num_layers());
  tape.outputs.reserve(params.num_layers());
  Matrix h = input;
  for (std::size_t i = 0; i < params.num_layers(); ++i) {
    Matrix z = h * params.weights[i].transpose();
    z.rowwise() += params.biases[i].transpose().row(0);
    const bool last = i + 1 == params.num_layers();
    detail::apply_activation(last ? params.output : params.hidden, z);
    tape.inputs.push_back(std::move(h));
    h = z;
    tape.outputs.push_back(std::move(z));
  }
  return {std::move(h), std::move(tape)};
}

/// Forward pass without keeping a tape.
inline Matrix mlp_predict(const MlpParams& params, const Matrix& input) {
  if (static_cast<std::size_t>(input.cols()) != params.input_dim())
    throw DimensionError("mlp_predict: input width mismatch");
  Matrix h = input;
  for (std::size_t i = 0; i < params.num_layers(); ++i) {
    Matrix z = h * params.weights[i].transpose();
    z.rowwise() += params.biases[i].transpose().row(0);
    detail::apply_activation(i + 1 == params.num_layers() ? params.output : params.hidden, z);
    h = std::move(z);
  }
  return h;
}

struct MlpGradients {
  ParamGrads params;  // W0, b0, W1, b1, ...
  Matrix input;       // dL/d input
};

/// Reverse pass. `output_grad` is dL/d output for the batch recorded in `tape`.
inline MlpGradients mlp_backward(const MlpParams& params, const MlpTape& tape,
                                 const Matrix& output_grad) {
  if (tape.outputs.size() != params.num_layers())
    throw StateError("mlp_backward: tape was recorded for a different network");
  for (std::size_t i = 0; i < params.num_layers(); ++i) {
    if (tape.inputs[i].cols() != params.weights[i].cols() ||
        tape.outputs[i].cols() != params.weights[i].rows())
      throw StateError("mlp_backward: tape shapes do not match parameters");
  }
  require_shape(output_grad, static_cast<Eigen::Index>(tape.batch),
                static_cast<Eigen::Index>(params.output_dim()), "mlp_backward output_grad");

  MlpGradients g;
  g.params.resize(2 * params.num_layers());
  Matrix delta = output_grad;
  for (std::size_t k = params.num_layers(); k-- > 0;) {
    const bool last = k + 1 == params.num_layers();
    detail::scale_by_derivative(last ? params.output : params.hidden, tape.outputs[k], delta);
    g.params[2 * k] = delta.transpose() * tape.inputs[k];
    g.params[2 * k + 1] = delta.colwise().sum().transpose();
    delta = delta * params.weights[k];
  }
  g.input = std::move(delta);
  return g;
}

}  // namespace ltd3
