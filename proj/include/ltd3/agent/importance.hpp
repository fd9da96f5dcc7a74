#pragma once

#include <algorithm>
#include <cmath>

#include "ltd3/errors.hpp"
#include "ltd3/numerics/matrix.hpp"

namespace ltd3 {

/// Batch-normalized Boltzmann weights B * softmax(Q). The partition function
/// of exp(Q) cancels in the ratio, and the result has mean exactly one.
inline Vector normalized_importance_weights(const Vector& q) {
  const Eigen::Index b = q.size();
  if (b < 1) throw DimensionError("normalized_importance_weights: empty batch");
  if (!q.allFinite()) throw NumericError("normalized_importance_weights: non-finite Q values");
  const double mx = q.maxCoeff();
  Vector e = (q.array() - mx).exp().matrix();
  return e * (static_cast<double>(b) / e.sum());
}

/// Truncation to [1 - c_clip, 1 + c_clip].
inline double clip_weight(double w, double c_clip) {
  if (!(c_clip > 0.0)) throw ConfigError("clip_weight: c_clip must be > 0", "c_clip");
  return std::max(1.0 - c_clip, std::min(w, 1.0 + c_clip));
}

inline Vector clip_weights(const Vector& w, double c_clip) {
  Vector out(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) out(i) = clip_weight(w(i), c_clip);
  return out;
}

}  // namespace ltd3
