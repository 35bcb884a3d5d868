#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace nnddm {

struct QuadratureRule {
  std::vector<double> points;   // on [0, 1]
  std::vector<double> weights;  // sum to 1
};

/// n-point Gauss-Legendre rule mapped to [0, 1] (Newton on P_n).
inline QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one point");
  QuadratureRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    double x = std::cos(std::numbers::pi * (k + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int m = 2; m <= n; ++m) {
        const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = x;
    for (int m = 2; m <= n; ++m) {
      const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    rule.points[n - 1 - k] = 0.5 * (x + 1.0);
    rule.weights[n - 1 - k] = 1.0 / ((1.0 - x * x) * dp * dp);  // 2/(...) halved for [0,1]
  }
  return rule;
}

}  // namespace nnddm
