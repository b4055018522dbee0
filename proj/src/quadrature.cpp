#include "gkflab/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "gkflab/error.hpp"

namespace gkflab {

QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw InvalidArgument("gauss_legendre: need at least one node");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[n - 1 - i] = mid + half * x;
    rule.weights[i] = half * w;
    rule.weights[n - 1 - i] = half * w;
  }
  return rule;
}

}  // namespace gkflab
