#pragma once

#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "savmhd/fem.hpp"
#include "savmhd/linsolve.hpp"
#include "savmhd/problems.hpp"

namespace savmhd {

/// Mass coefficient of the second Stokes solve in the BDF2 scheme. Only
/// `Bdf2` reconstructs a solution of the coupled scheme; `Naive` (1/tau)
/// exists so the self-test can check that the residual oracle catches it.
enum class SplitCoefficient { Bdf2, Naive };

struct SchemeConfig {
  int order = 1;
  double tau = 0.1;
  double t_final = 1.0;
  double re = 1.0;
  double kappa = 1.0;
  SplitCoefficient split_coefficient = SplitCoefficient::Bdf2;

  /// Re, kappa and T taken from the problem.
  static SchemeConfig for_problem(const ProblemDefinition& problem, int order, double tau);

  /// Throws std::invalid_argument unless order is 1 or 2, tau, Re, kappa > 0
  /// and t_final is an integer multiple of tau (relative slack 1e-9).
  void validate() const;
  int num_steps() const;
};

struct SavState {
  FieldVector u;
  FieldVector p;
  FieldVector j;
  FieldVector phi;
  double q = 1.0;
  // Previous level, needed by BDF2; empty before the first step.
  FieldVector prev_u;
  FieldVector prev_j;
  double prev_q = 1.0;
  int step = 0;
  double t = 0.0;

  bool has_previous() const { return !prev_u.coeffs.empty(); }
};

struct StepReport {
  int step = 0;  // index of the new level, n + 1
  double t = 0.0;
  double s = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
  double denominator = 0.0;
  /// Boundary term subtracted from A1, zero for homogeneous velocity data.
  double boundary_flux = 0.0;
  /// 1/2 |u|^2 + 1/2 q^2 at the new level.
  double energy = 0.0;
  /// 1/4 (|u|^2 + |2u - u_prev|^2) + same for q, at the new level.
  double energy_bdf = 0.0;
  /// Re^-1 |grad u|^2 + kappa |J|^2 + q^2 / T at the new level.
  double dissipation = 0.0;
  /// Discrete energy balance of the step. Vanishes up to rounding for
  /// homogeneous boundary data and zero forcing.
  double energy_identity_residual = 0.0;
  /// Relative gap between A2 and -(c |u2|^2 + Re^-1 |grad u2|^2 + kappa |J2|^2).
  double a2_identity_defect = 0.0;
  double max_div_j = 0.0;
  double max_solver_residual = 0.0;
  /// Max norm of the first Darcy solution; identically zero when J has
  /// homogeneous normal trace and no forcing.
  double j1_max = 0.0;
  bool second_order = false;
};

/// Assembles and factorizes every operator for one (problem, mesh, tau,
/// order) combination and advances states. All factorizations are built in
/// the constructor and reused by every step.
class SavStepper {
 public:
  SavStepper(const Discretization& disc, ProblemDefinition problem, SchemeConfig config);

  const Discretization& discretization() const { return disc_; }
  const ProblemDefinition& problem() const { return problem_; }
  const SchemeConfig& config() const { return config_; }

  const SparseMatrix& mass() const { return mass_; }
  const SparseMatrix& stiffness() const { return stiffness_; }
  const SparseMatrix& div() const { return div_; }
  const SparseMatrix& rt_mass() const { return rt_mass_; }
  const SparseMatrix& rt_div() const { return rt_div_; }

  /// Velocity interpolant with boundary vertices set to the boundary data at
  /// t = 0, q = 1, p = 0, and (J, phi) from the Darcy problem driven by u^0.
  SavState initial_state() const;

  std::pair<SavState, StepReport> step_first_order(const SavState& state) const;
  /// Requires a previous level (state.step >= 1).
  std::pair<SavState, StepReport> step_second_order(const SavState& state) const;
  /// Order-1 step, or BDF2 once a previous level exists.
  std::pair<SavState, StepReport> step(const SavState& state) const;

  /// 1/2 u^T M u + 1/2 q^2.
  double energy(const SavState& state) const;
  /// Zero when no previous level exists.
  double energy_bdf(const SavState& state) const;

 private:
  std::pair<SavState, StepReport> advance(const SavState& state, bool bdf2) const;
  SaddleSolution solve_darcy(std::span<const double> rhs, std::span<const double> fixed_values,
                             Accuracy accuracy = Accuracy::Standard) const;

  const Discretization& disc_;
  ProblemDefinition problem_;
  SchemeConfig config_;
  SparseMatrix mass_;
  SparseMatrix stiffness_;
  SparseMatrix div_;
  SparseMatrix rt_mass_;
  SparseMatrix rt_div_;
  std::optional<SaddleSolver> stokes_euler_;
  std::optional<SaddleSolver> stokes_bdf2_;
  std::optional<SaddleSolver> darcy_;
  bool solve_first_darcy_ = false;
};

struct RunOptions {
  bool keep_states = false;
  std::function<void(const SavState&, const StepReport&)> on_step;
};

struct Trajectory {
  SavState initial;
  double initial_energy = 0.0;
  SavState final_state;
  std::vector<StepReport> reports;
  /// Every level including the initial one, when requested.
  std::vector<SavState> states;
  /// Set when a step threw; the trajectory then holds the steps before it.
  std::exception_ptr failure;
  std::string failure_message;

  bool completed() const { return !failure; }
};

/// Runs config.num_steps() steps from the initial state. Construction errors
/// propagate; step errors are caught and recorded in the trajectory.
Trajectory run(const Discretization& disc, const ProblemDefinition& problem, const SchemeConfig& config,
               const RunOptions& options = {});

}  // namespace savmhd
