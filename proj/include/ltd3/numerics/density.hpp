#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "ltd3/errors.hpp"

namespace ltd3 {

/// Range the posterior's Gaussian log standard deviation is clamped to.
inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

struct LogStdRange {
  double lo = kLogStdMin;
  double hi = kLogStdMax;

  double clamp(double log_std) const { return std::clamp(log_std, lo, hi); }
  bool interior(double log_std) const { return log_std > lo && log_std < hi; }
};

inline double clamp_log_std(double log_std) { return LogStdRange{}.clamp(log_std); }

/// Log density of a factored Gaussian.
inline double gaussian_log_prob(std::span<const double> z, std::span<const double> mean,
                                std::span<const double> log_std) {
  if (z.size() != mean.size() || z.size() != log_std.size())
    throw DimensionError("gaussian_log_prob: length mismatch");
  constexpr double half_log_2pi = 0.91893853320467274178;  // log(2pi)/2
  double lp = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double d = (z[i] - mean[i]) * std::exp(-log_std[i]);
    lp += -half_log_2pi - log_std[i] - 0.5 * d * d;
  }
  return lp;
}

inline double logsumexp(std::span<const double> x) {
  if (x.empty()) throw DimensionError("logsumexp: empty input");
  const double mx = *std::max_element(x.begin(), x.end());
  double s = 0.0;
  for (double v : x) s += std::exp(v - mx);
  return mx + std::log(s);
}

inline std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw DimensionError("softmax: empty input");
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double s = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) s += (p[i] = std::exp(logits[i] - mx));
  for (double& v : p) v /= s;
  return p;
}

inline double categorical_log_prob(std::span<const double> logits, std::size_t index) {
  if (index >= logits.size())
    throw BoundsError("categorical_log_prob: index " + std::to_string(index) +
                      " out of range for " + std::to_string(logits.size()) + " classes");
  return logits[index] - logsumexp(logits);
}

}  // namespace ltd3
