#pragma once

#include <vector>

namespace gkflab {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule with n points on [a, b].
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

}  // namespace gkflab
