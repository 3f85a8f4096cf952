#include "savmhd/quadrature.hpp"

#include <cmath>

namespace savmhd {

namespace {

QuadratureRule make_degree6_rule() {
  // Dunavant's degree-6 rule; orbit parameters re-solved from the moment
  // equations to 20 digits.
  constexpr double w_a = 0.11678627572637917274;
  constexpr double a = 0.50142650965817891951;
  constexpr double w_b = 0.050844906370206757331;
  constexpr double b = 0.87382197101699563065;
  constexpr double w_c = 0.082851075618373701633;
  constexpr double c1 = 0.053145049844817027797;
  constexpr double c2 = 0.31035245103378428108;
  constexpr double c3 = 0.63650249912139869112;

  QuadratureRule rule;
  auto add = [&rule](double l0, double l1, double l2, double w) {
    rule.points.push_back({l0, l1, l2});
    rule.weights.push_back(0.5 * w);
  };
  const double a_rest = 0.5 * (1.0 - a);
  add(a, a_rest, a_rest, w_a);
  add(a_rest, a, a_rest, w_a);
  add(a_rest, a_rest, a, w_a);
  const double b_rest = 0.5 * (1.0 - b);
  add(b, b_rest, b_rest, w_b);
  add(b_rest, b, b_rest, w_b);
  add(b_rest, b_rest, b, w_b);
  add(c1, c2, c3, w_c);
  add(c1, c3, c2, w_c);
  add(c2, c1, c3, w_c);
  add(c2, c3, c1, w_c);
  add(c3, c1, c2, w_c);
  add(c3, c2, c1, w_c);
  return rule;
}

}  // namespace

const QuadratureRule& triangle_rule_degree6() {
  static const QuadratureRule rule = make_degree6_rule();
  return rule;
}

const LineRule& gauss_legendre3() {
  static const LineRule rule = [] {
    const double s = 0.5 * std::sqrt(3.0 / 5.0);
    return LineRule{{0.5 - s, 0.5, 0.5 + s}, {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0}};
  }();
  return rule;
}

}  // namespace savmhd
