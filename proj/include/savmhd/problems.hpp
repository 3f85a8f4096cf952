#pragma once

#include <optional>
#include <string>

#include "savmhd/fem.hpp"

namespace savmhd {

/// Closed-form fields of a problem with a known solution.
struct ExactSolution {
  VectorField u;
  TensorField grad_u;
  ScalarField p;
  VectorField j;
  ScalarField div_j;
  ScalarField phi;
};

/// Data for one experiment. Empty std::function members mean "identically
/// zero" (forcing) or "homogeneous" (boundary data).
struct ProblemDefinition {
  std::string name;
  std::optional<ExactSolution> exact;
  VectorField forcing_u;
  VectorField forcing_j;
  VectorField initial_velocity;
  VectorField boundary_velocity;
  VectorField boundary_current;
  ScalarField b3;
  double re = 1.0;
  double kappa = 1.0;
  double t_final = 1.0;
};

/// u = (y e^-t, x cos t), p = sin t, J = (sin t, cos t), phi = cos t,
/// B3 = 1, T = 1. The forcing follows Re and kappa (default 1).
ProblemDefinition accuracy_problem_2d(double re = 1.0, double kappa = 1.0);

/// Taylor-Green type vortex (sin pi x cos pi y, -cos pi x sin pi y) with
/// homogeneous boundary data and no forcing, T = 3.
ProblemDefinition stability_problem_2d(double re, double kappa);

/// Driven cavity: lid velocity (g1, 0) on the top edge, ramped to zero over
/// one mesh cell near the corners. Re = 200, kappa = 10, T = 10.
ProblemDefinition cavity_problem_2d(int mesh_n = 32);

/// Residuals of the strong equations for an exact solution at (x, y, t),
/// with every derivative taken by fourth-order central differences of the
/// closed forms. Returns {momentum_x, momentum_y, ohm_x, ohm_y}.
std::array<double, 4> forcing_residual(const ProblemDefinition& problem, double x, double y, double t);

}  // namespace savmhd
