#pragma once

#include <functional>

namespace darboux {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  int max_depth = 24;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

/// Adaptive Gauss-Kronrod 7/15 by bisection. Intervals are accepted when the
/// Kronrod-Gauss difference is below their share of `abs_tol`; exceeding
/// `max_depth` throws QuadratureError. Reversed limits give the negated integral.
QuadratureResult integrate_gk15(const std::function<double(double)>& f, double a, double b,
                                const QuadratureOptions& options = {});

}  // namespace darboux
