#include <doctest.h>

#include <cmath>

#include "savmhd/quadrature.hpp"

using namespace savmhd;

namespace {
// Integral of x^a y^b over the reference triangle: a! b! / (a + b + 2)!.
double monomial_integral(int a, int b) {
  return std::tgamma(a + 1.0) * std::tgamma(b + 1.0) / std::tgamma(a + b + 3.0);
}
}  // namespace

TEST_SUITE("quadrature") {

TEST_CASE("degree-6 rule is exact on monomials up to degree 6") {
  const auto& r = triangle_rule_degree6();
  double wsum = 0.0;
  for (double w : r.weights) wsum += w;
  CHECK(wsum == doctest::Approx(0.5).epsilon(1e-15));
  for (int a = 0; a <= 6; ++a)
    for (int b = 0; a + b <= 6; ++b) {
      double q = 0.0;
      for (std::size_t i = 0; i < r.points.size(); ++i)
        q += r.weights[i] * std::pow(r.points[i][1], a) * std::pow(r.points[i][2], b);
      CHECK(std::abs(q - monomial_integral(a, b)) < 1e-15);
    }
}

TEST_CASE("barycentric points sum to one") {
  for (const auto& p : triangle_rule_degree6().points) CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0));
}

TEST_CASE("line rule is exact to degree 5") {
  const auto& g = gauss_legendre3();
  for (int k = 0; k <= 5; ++k) {
    double q = 0.0;
    for (int i = 0; i < 3; ++i) q += g.weights[i] * std::pow(g.points[i], k);
    CHECK(q == doctest::Approx(1.0 / (k + 1)).epsilon(1e-15));
  }
}

}
