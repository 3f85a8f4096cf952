#pragma once

#include <array>
#include <vector>

namespace savmhd {

struct QuadratureRule {
  std::vector<std::array<double, 3>> points;  // barycentric coordinates
  std::vector<double> weights;                // sum to 1/2, the reference triangle area
};

/// Symmetric 12-point rule, exact for bivariate polynomials of degree <= 6.
/// Shared by every assembly and error routine.
const QuadratureRule& triangle_rule_degree6();

struct LineRule {
  std::array<double, 3> points;  // parameters on [0, 1]
  std::array<double, 3> weights; // sum to 1
};

/// 3-point Gauss-Legendre on [0, 1], exact to degree 5.
const LineRule& gauss_legendre3();

}  // namespace savmhd
