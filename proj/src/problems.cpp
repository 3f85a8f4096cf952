#include "savmhd/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "savmhd/errors.hpp"

namespace savmhd {

ProblemDefinition accuracy_problem_2d(double re, double kappa) {
  if (!(re > 0.0) || !(kappa > 0.0)) throw std::invalid_argument("accuracy_problem_2d: Re and kappa must be positive");
  ProblemDefinition p;
  p.name = "accuracy";
  p.re = re;
  p.kappa = kappa;
  p.t_final = 1.0;

  ExactSolution ex;
  ex.u = [](double x, double y, double t) -> Vec2 { return {y * std::exp(-t), x * std::cos(t)}; };
  ex.grad_u = [](double, double, double t) -> Mat2 { return {0.0, std::exp(-t), std::cos(t), 0.0}; };
  ex.p = [](double, double, double t) { return std::sin(t); };
  ex.j = [](double, double, double t) -> Vec2 { return {std::sin(t), std::cos(t)}; };
  ex.div_j = [](double, double, double) { return 0.0; };
  ex.phi = [](double, double, double t) { return std::cos(t); };
  p.exact = ex;

  // u_t - Re^-1 lap u + u.grad u + grad p - kappa J x B, with lap u = 0, grad p = 0.
  p.forcing_u = [kappa](double x, double y, double t) -> Vec2 {
    const double e = std::exp(-t);
    const double c = std::cos(t);
    const double s = std::sin(t);
    return {-y * e + x * e * c - kappa * c, -x * s + y * e * c + kappa * s};
  };
  // J + grad phi - u x B, grad phi = 0.
  p.forcing_j = [](double x, double y, double t) -> Vec2 {
    return {std::sin(t) - x * std::cos(t), std::cos(t) + y * std::exp(-t)};
  };
  p.initial_velocity = ex.u;
  p.boundary_velocity = ex.u;
  p.boundary_current = ex.j;
  p.b3 = [](double, double, double) { return 1.0; };
  return p;
}

ProblemDefinition stability_problem_2d(double re, double kappa) {
  if (!(re > 0.0) || !(kappa > 0.0)) throw std::invalid_argument("stability_problem_2d: Re and kappa must be positive");
  ProblemDefinition p;
  p.name = "stability";
  p.re = re;
  p.kappa = kappa;
  p.t_final = 3.0;
  p.initial_velocity = [](double x, double y, double) -> Vec2 {
    using std::numbers::pi;
    return {std::sin(pi * x) * std::cos(pi * y), -std::cos(pi * x) * std::sin(pi * y)};
  };
  p.b3 = [](double, double, double) { return 1.0; };
  return p;
}

ProblemDefinition cavity_problem_2d(int mesh_n) {
  if (mesh_n < 1) throw std::invalid_argument("cavity_problem_2d: mesh_n must be >= 1");
  ProblemDefinition p;
  p.name = "cavity2d";
  p.re = 200.0;
  p.kappa = 10.0;
  p.t_final = 10.0;
  const double h = 1.0 / mesh_n;
  p.boundary_velocity = [h](double x, double y, double) -> Vec2 {
    const double ramp_x = std::clamp(std::min({1.0, x / h, (1.0 - x) / h}), 0.0, 1.0);
    const double ramp_y = std::max(0.0, (y - (1.0 - h)) / h);
    return {ramp_x * std::min(ramp_y, 1.0), 0.0};
  };
  p.initial_velocity = p.boundary_velocity;
  p.b3 = [](double, double, double) { return 1.0; };
  return p;
}

std::array<double, 4> forcing_residual(const ProblemDefinition& problem, double x, double y, double t) {
  if (!problem.exact) throw UnsupportedProblemError("forcing_residual: problem '" + problem.name + "' has no exact solution");
  const ExactSolution& ex = *problem.exact;
  const VectorField zero_vec = [](double, double, double) -> Vec2 { return {0.0, 0.0}; };
  const VectorField& fu = problem.forcing_u ? problem.forcing_u : zero_vec;
  const VectorField& fj = problem.forcing_j ? problem.forcing_j : zero_vec;

  // Fourth-order stencils: first derivatives with step d1, second with d2.
  const double d1 = 1e-3;
  const double d2 = 1e-2;
  auto first = [d1](auto&& f) {
    return (-f(2 * d1) + 8 * f(d1) - 8 * f(-d1) + f(-2 * d1)) / (12 * d1);
  };
  auto second = [d2](auto&& f) {
    return (-f(2 * d2) + 16 * f(d2) - 30 * f(0.0) + 16 * f(-d2) - f(-2 * d2)) / (12 * d2 * d2);
  };

  const Vec2 u = ex.u(x, y, t);
  const Vec2 j = ex.j(x, y, t);
  const double b = problem.b3(x, y, t);
  const Vec2 f = fu(x, y, t);
  const Vec2 g = fj(x, y, t);
  const double dpdx = first([&](double s) { return ex.p(x + s, y, t); });
  const double dpdy = first([&](double s) { return ex.p(x, y + s, t); });
  const double dphidx = first([&](double s) { return ex.phi(x + s, y, t); });
  const double dphidy = first([&](double s) { return ex.phi(x, y + s, t); });

  std::array<double, 4> r{};
  for (int c = 0; c < 2; ++c) {
    const double ut = first([&](double s) { return ex.u(x, y, t + s)[c]; });
    const double ux = first([&](double s) { return ex.u(x + s, y, t)[c]; });
    const double uy = first([&](double s) { return ex.u(x, y + s, t)[c]; });
    const double lap = second([&](double s) { return ex.u(x + s, y, t)[c]; }) +
                       second([&](double s) { return ex.u(x, y + s, t)[c]; });
    const double grad_p = c == 0 ? dpdx : dpdy;
    const double lorentz = c == 0 ? j[1] * b : -j[0] * b;
    r[c] = ut - lap / problem.re + u[0] * ux + u[1] * uy + grad_p - problem.kappa * lorentz - f[c];

    const double grad_phi = c == 0 ? dphidx : dphidy;
    const double cross = c == 0 ? u[1] * b : -u[0] * b;
    r[2 + c] = j[c] + grad_phi - cross - g[c];
  }
  return r;
}

}  // namespace savmhd
