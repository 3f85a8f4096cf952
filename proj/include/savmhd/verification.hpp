#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "savmhd/fem.hpp"
#include "savmhd/linsolve.hpp"
#include "savmhd/problems.hpp"
#include "savmhd/sav_stepper.hpp"

namespace savmhd::verify {

/// Row-major dense matrix for reference computations on small meshes.
struct DenseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}
  double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }
};

DenseMatrix to_dense(const SparseMatrix& a);
/// Max |a_ij - b_ij|; infinity on shape mismatch.
double max_abs_difference(const DenseMatrix& a, const DenseMatrix& b);
double max_abs_difference(std::span<const double> a, std::span<const double> b);

// Reference assembly. Basis functions are rebuilt per element from monomial
// Vandermonde systems (P1 and bubble) and flux conditions (RT0). Matrices are
// integrated with a collapsed 4x4 Gauss product rule, exact to degree 7 on a
// triangle. Right-hand-side vectors use the same degree-6 points as the
// library so that integrands above degree 6 (convection) compare to rounding.
DenseMatrix reference_velocity_mass(const Discretization& disc);
DenseMatrix reference_velocity_stiffness(const Discretization& disc);
DenseMatrix reference_velocity_pressure_div(const Discretization& disc);
DenseMatrix reference_rt0_mass(const Discretization& disc);
DenseMatrix reference_rt0_div(const Discretization& disc);
std::vector<double> reference_mean_weights(const Discretization& disc, Space space);
std::vector<double> reference_convection_rhs(const Discretization& disc, std::span<const double> u);
std::vector<double> reference_lorentz_rhs(const Discretization& disc, std::span<const double> j, double b3);
std::vector<double> reference_cross_rhs(const Discretization& disc, std::span<const double> u, double b3);

/// Solves the saddle system densely with partial pivoting, fixed dofs
/// eliminated and the mean constraint bordered. Returns primal then dual.
std::vector<double> reference_saddle_solve(const SaddleSystem& system, std::span<const double> primal_rhs,
                                           std::span<const double> dual_rhs, std::span<const double> fixed_values);

double min_eigenvalue_symmetric(const DenseMatrix& a);
int numerical_rank(const DenseMatrix& a);

/// Residuals of the coupled (unsplit) scheme evaluated at a computed level.
/// Each entry is the max-norm of the equation's residual divided by
/// max(1, largest term in that equation).
struct CoupledResidual {
  double momentum = 0.0;
  double continuity = 0.0;
  double current = 0.0;
  double charge = 0.0;
  double scalar = 0.0;
  double boundary = 0.0;

  double max() const;
};

/// `prev` is level n (with its own previous level when BDF2 applies), `next`
/// is level n + 1. BDF2 is used when the config asks for order 2 and `prev`
/// has a previous level; the mass coefficient is always 3/(2 tau) there,
/// regardless of the split coefficient the stepper used.
CoupledResidual coupled_residual(const Discretization& disc, const ProblemDefinition& problem,
                                 const SchemeConfig& config, const SavState& prev, const SavState& next);

/// Deterministic uniform values in [-1, 1].
std::vector<double> random_vector(std::size_t n, std::uint64_t seed);

enum class Injection { None, FlipLorentzSign, NaiveBdf2Coefficient };

Injection parse_injection(const std::string& name);
const char* to_string(Injection injection);

struct SuiteResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;      // largest measured defect
  double tolerance = 0.0;
  std::string detail;
};

/// Oracle-equivalence and identity suites on meshes n <= 3: mesh, assembly,
/// solve, duality, A2 identity, energy identity, charge, coupled residual.
/// The injection corrupts the corresponding operator inside the suites only.
std::vector<SuiteResult> run_selftest(Injection injection = Injection::None);

}  // namespace savmhd::verify
