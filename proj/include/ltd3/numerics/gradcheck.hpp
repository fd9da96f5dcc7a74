#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "ltd3/numerics/matrix.hpp"

namespace ltd3 {

/// A parameter tensor together with the analytic gradient claimed for it.
struct GradCheckBlock {
  std::string name;
  Matrix* param = nullptr;
  Matrix analytic;
};

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
  Eigen::Index worst_index = -1;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> blocks;
  double tolerance = 0.0;

  double max_rel_error() const {
    double m = 0.0;
    for (const auto& b : blocks) m = std::max(m, b.max_rel_error);
    return m;
  }
  bool passed() const { return max_rel_error() < tolerance; }
};

/// Relative error with an absolute floor so that gradients which are zero on
/// both sides do not divide by zero.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Compares analytic gradients against central finite differences. `loss`
/// reads the parameters through the block pointers; each entry is perturbed
/// in place and restored bit-exactly.
inline GradCheckReport check_gradients(const std::function<double()>& loss,
                                       std::vector<GradCheckBlock>& blocks, double step = 1e-5,
                                       double tolerance = 1e-4, double floor = 1e-6) {
  GradCheckReport report;
  report.tolerance = tolerance;
  for (auto& b : blocks) {
    require_shape(b.analytic, b.param->rows(), b.param->cols(), "check_gradients " + b.name);
    GradCheckEntry e{b.name, 0.0, -1};
    for (Eigen::Index k = 0; k < b.param->size(); ++k) {
      double& p = b.param->data()[k];
      const double saved = p;
      p = saved + step;
      const double up = loss();
      p = saved - step;
      const double down = loss();
      p = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double err = relative_error(b.analytic.data()[k], numeric, floor);
      if (err > e.max_rel_error || e.worst_index < 0) {
        e.max_rel_error = std::max(e.max_rel_error, err);
        if (err >= e.max_rel_error) e.worst_index = k;
      }
    }
    report.blocks.push_back(std::move(e));
  }
  return report;
}

}  // namespace ltd3
