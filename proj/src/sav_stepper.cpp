#include "savmhd/sav_stepper.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "savmhd/errors.hpp"

namespace savmhd {

SchemeConfig SchemeConfig::for_problem(const ProblemDefinition& problem, int order, double tau) {
  SchemeConfig c;
  c.order = order;
  c.tau = tau;
  c.t_final = problem.t_final;
  c.re = problem.re;
  c.kappa = problem.kappa;
  return c;
}

void SchemeConfig::validate() const {
  if (order != 1 && order != 2) throw std::invalid_argument("SchemeConfig: order must be 1 or 2");
  if (!(tau > 0.0)) throw std::invalid_argument("SchemeConfig: tau must be positive");
  if (!(re > 0.0) || !(kappa > 0.0)) throw std::invalid_argument("SchemeConfig: Re and kappa must be positive");
  if (!(t_final > 0.0)) throw std::invalid_argument("SchemeConfig: t_final must be positive");
  const double ratio = t_final / tau;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
    std::ostringstream msg;
    msg << "SchemeConfig: tau = " << tau << " does not divide t_final = " << t_final;
    throw std::invalid_argument(msg.str());
  }
}

int SchemeConfig::num_steps() const { return static_cast<int>(std::llround(t_final / tau)); }

namespace {

std::vector<double> combine(double a, std::span<const double> x, double b, std::span<const double> y) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + b * y[i];
  return out;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

const ScalarField& unit_field() {
  static const ScalarField one = [](double, double, double) { return 1.0; };
  return one;
}

}  // namespace

SavStepper::SavStepper(const Discretization& disc, ProblemDefinition problem, SchemeConfig config)
    : disc_(disc), problem_(std::move(problem)), config_(config) {
  config_.validate();
  if (!problem_.b3) problem_.b3 = unit_field();
  mass_ = assemble_velocity_mass(disc_);
  stiffness_ = assemble_velocity_stiffness(disc_);
  div_ = assemble_velocity_pressure_div(disc_);
  rt_mass_ = assemble_rt0_mass(disc_);
  rt_div_ = assemble_rt0_div(disc_);

  const double nu = 1.0 / config_.re;
  const double tau = config_.tau;
  stokes_euler_.emplace(make_stokes_system(disc_, mass_, stiffness_, div_, 1.0 / tau, nu));
  if (config_.order == 2) stokes_bdf2_.emplace(make_stokes_system(disc_, mass_, stiffness_, div_, 1.5 / tau, nu));
  darcy_.emplace(make_darcy_system(disc_, rt_mass_, rt_div_));
  solve_first_darcy_ = static_cast<bool>(problem_.boundary_current) || static_cast<bool>(problem_.forcing_j);
}

double SavStepper::energy(const SavState& s) const {
  return 0.5 * quadratic_form(mass_, s.u.coeffs) + 0.5 * s.q * s.q;
}

double SavStepper::energy_bdf(const SavState& s) const {
  if (!s.has_previous()) return 0.0;
  const auto w = combine(2.0, s.u.coeffs, -1.0, s.prev_u.coeffs);
  const double qw = 2.0 * s.q - s.prev_q;
  return 0.25 * (quadratic_form(mass_, s.u.coeffs) + quadratic_form(mass_, w)) + 0.25 * (s.q * s.q + qw * qw);
}

SaddleSolution SavStepper::solve_darcy(std::span<const double> rhs, std::span<const double> fixed_values,
                                       Accuracy accuracy) const {
  const std::vector<double> dual(disc_.layout().n_potential, 0.0);
  return darcy_->solve(rhs, dual, fixed_values, accuracy);
}

SavState SavStepper::initial_state() const {
  const double t0 = 0.0;
  SavState s;
  s.u = problem_.initial_velocity ? interpolate_velocity(disc_, problem_.initial_velocity, t0)
                                  : disc_.zeros(Space::Velocity);
  const BoundaryValues ub = velocity_boundary_values(disc_, problem_.boundary_velocity, t0);
  for (std::size_t k = 0; k < ub.dofs.size(); ++k) s.u.coeffs[ub.dofs[k]] = ub.values[k];
  s.p = disc_.zeros(Space::Pressure);

  std::vector<double> rhs = assemble_cross_rhs(disc_, s.u, problem_.b3, t0);
  if (problem_.forcing_j) axpy(1.0, assemble_current_load(disc_, problem_.forcing_j, t0), rhs);
  const SaddleSolution sol = solve_darcy(rhs, current_boundary_fluxes(disc_, problem_.boundary_current, t0).values);
  s.j = FieldVector{Space::Current, sol.primal};
  s.phi = FieldVector{Space::Potential, sol.dual};
  s.q = 1.0;
  s.step = 0;
  s.t = t0;
  return s;
}

std::pair<SavState, StepReport> SavStepper::step_first_order(const SavState& state) const {
  return advance(state, false);
}

std::pair<SavState, StepReport> SavStepper::step_second_order(const SavState& state) const {
  if (config_.order != 2) throw std::logic_error("step_second_order: stepper was built for the first-order scheme");
  if (!state.has_previous()) throw std::invalid_argument("step_second_order: state has no previous level");
  return advance(state, true);
}

std::pair<SavState, StepReport> SavStepper::step(const SavState& state) const {
  if (config_.order == 2 && state.has_previous()) return advance(state, true);
  return advance(state, false);
}

std::pair<SavState, StepReport> SavStepper::advance(const SavState& st, bool bdf2) const {
  const DofLayout& layout = disc_.layout();
  const double tau = config_.tau;
  const double T = config_.t_final;
  const double kappa = config_.kappa;
  const int n1 = st.step + 1;
  const double t1 = n1 * tau;

  // Explicit velocity/current in the nonlinear and coupling terms.
  FieldVector u_ext = st.u;
  FieldVector j_ext = st.j;
  std::vector<double> u_hist;
  double q_hist = 0.0;
  double q_coef = 0.0;
  double split_coef = 0.0;
  if (bdf2) {
    u_ext.coeffs = combine(2.0, st.u.coeffs, -1.0, st.prev_u.coeffs);
    j_ext.coeffs = combine(2.0, st.j.coeffs, -1.0, st.prev_j.coeffs);
    u_hist = combine(2.0 / tau, st.u.coeffs, -0.5 / tau, st.prev_u.coeffs);
    q_hist = (4.0 * st.q - st.prev_q) / (2.0 * tau);
    q_coef = 1.5 / tau;
    split_coef = config_.split_coefficient == SplitCoefficient::Bdf2 ? 1.5 / tau : 1.0 / tau;
  } else {
    u_hist = combine(1.0 / tau, st.u.coeffs, 0.0, st.u.coeffs);
    q_hist = st.q / tau;
    q_coef = 1.0 / tau;
    split_coef = 1.0 / tau;
  }
  const SaddleSolver& stokes1 = bdf2 ? *stokes_bdf2_ : *stokes_euler_;
  const bool split_euler = !bdf2 || config_.split_coefficient == SplitCoefficient::Naive;
  const SaddleSolver& stokes2 = split_euler ? *stokes_euler_ : *stokes_bdf2_;

  const std::vector<double> conv = assemble_convection_rhs(disc_, u_ext);
  const std::vector<double> lor = assemble_lorentz_rhs(disc_, j_ext, problem_.b3, t1);
  const std::vector<double> cross = assemble_cross_rhs(disc_, u_ext, problem_.b3, t1);
  const std::vector<double> zero_p(layout.n_pressure, 0.0);

  StepReport rep;
  rep.step = n1;
  rep.t = t1;
  rep.second_order = bdf2;

  // Stokes-1: history, forcing and boundary data.
  std::vector<double> rhs1 = mass_ * u_hist;
  if (problem_.forcing_u) axpy(1.0, assemble_velocity_load(disc_, problem_.forcing_u, t1), rhs1);
  const BoundaryValues ub = velocity_boundary_values(disc_, problem_.boundary_velocity, t1);
  const SaddleSolution s1 = stokes1.solve(rhs1, zero_p, ub.values);

  // Stokes-2: explicit convection and Lorentz force, homogeneous data.
  const std::vector<double> rhs2 = combine(kappa, lor, -1.0, conv);
  const std::vector<double> zero_ub(ub.values.size(), 0.0);
  const SaddleSolution s2 = stokes2.solve(rhs2, zero_p, zero_ub, Accuracy::Extended);

  // Darcy-1 is only non-trivial with normal-trace data or forcing.
  SaddleSolution d1;
  const BoundaryValues jb = current_boundary_fluxes(disc_, problem_.boundary_current, t1);
  if (solve_first_darcy_) {
    std::vector<double> rhs = problem_.forcing_j ? assemble_current_load(disc_, problem_.forcing_j, t1)
                                                 : std::vector<double>(layout.n_current, 0.0);
    d1 = solve_darcy(rhs, jb.values);
  } else {
    d1.primal.assign(layout.n_current, 0.0);
    d1.dual.assign(layout.n_potential, 0.0);
  }
  const std::vector<double> zero_jb(jb.values.size(), 0.0);
  const SaddleSolution d2 = solve_darcy(cross, zero_jb, Accuracy::Extended);

  rep.max_solver_residual =
      std::max({s1.relative_residual, s2.relative_residual, d1.relative_residual, d2.relative_residual});
  rep.j1_max = norm_inf(d1.primal);

  rep.boundary_flux = boundary_kinetic_flux(disc_, problem_.boundary_velocity, t1);
  // The split solutions can be tiny relative to the data, so these products
  // are accumulated in compensated arithmetic.
  rep.a1 = dot_compensated(conv, s1.primal) - kappa * dot_compensated(lor, s1.primal) -
           kappa * dot_compensated(cross, d1.primal) - rep.boundary_flux;
  rep.a2 = dot_compensated(conv, s2.primal) - kappa * dot_compensated(lor, s2.primal) -
           kappa * dot_compensated(cross, d2.primal);

  const double grow = std::exp(t1 / T);
  rep.denominator = q_coef + 1.0 / T - grow * grow * rep.a2;
  if (!(rep.denominator > 0.0)) {
    std::ostringstream msg;
    msg << "scalar auxiliary equation not solvable at step " << n1 << " (t = " << t1
        << "): leading coefficient " << rep.denominator << " <= 0";
    throw SolvabilityError(msg.str(), rep.denominator);
  }
  rep.s = (grow * rep.a1 + q_hist) / (rep.denominator / grow);

  const double a2_expected = -(split_coef * quadratic_form_compensated(mass_, s2.primal) +
                               quadratic_form_compensated(stiffness_, s2.primal) / config_.re +
                               kappa * quadratic_form_compensated(rt_mass_, d2.primal));
  const double a2_scale = std::abs(a2_expected);
  rep.a2_identity_defect = a2_scale > 0.0 ? std::abs(rep.a2 - a2_expected) / a2_scale : std::abs(rep.a2);

  SavState next;
  next.u = FieldVector{Space::Velocity, combine(1.0, s1.primal, rep.s, s2.primal)};
  next.p = FieldVector{Space::Pressure, combine(1.0, s1.dual, rep.s, s2.dual)};
  next.j = FieldVector{Space::Current, combine(1.0, d1.primal, rep.s, d2.primal)};
  next.phi = FieldVector{Space::Potential, combine(1.0, d1.dual, rep.s, d2.dual)};
  next.q = rep.s / grow;
  next.prev_u = st.u;
  next.prev_j = st.j;
  next.prev_q = st.q;
  next.step = n1;
  next.t = t1;

  for (int t = 0; t < disc_.num_triangles(); ++t) {
    rep.max_div_j = std::max(rep.max_div_j, std::abs(current_divergence(disc_, next.j.coeffs, t)));
  }

  rep.energy = energy(next);
  rep.energy_bdf = energy_bdf(next);
  rep.dissipation = quadratic_form(stiffness_, next.u.coeffs) / config_.re +
                    kappa * quadratic_form(rt_mass_, next.j.coeffs) + next.q * next.q / T;
  if (bdf2) {
    const auto d2u = combine(1.0, combine(1.0, next.u.coeffs, -2.0, st.u.coeffs), 1.0, st.prev_u.coeffs);
    const double d2q = next.q - 2.0 * st.q + st.prev_q;
    rep.energy_identity_residual = (rep.energy_bdf - energy_bdf(st)) / tau +
                                   (quadratic_form(mass_, d2u) + d2q * d2q) / (4.0 * tau) + rep.dissipation;
  } else {
    const auto du = combine(1.0, next.u.coeffs, -1.0, st.u.coeffs);
    const double dq = next.q - st.q;
    rep.energy_identity_residual = (rep.energy - energy(st)) / tau +
                                   (quadratic_form(mass_, du) + dq * dq) / (2.0 * tau) + rep.dissipation;
  }
  return {std::move(next), rep};
}

Trajectory run(const Discretization& disc, const ProblemDefinition& problem, const SchemeConfig& config,
               const RunOptions& options) {
  const SavStepper stepper(disc, problem, config);
  Trajectory traj;
  traj.initial = stepper.initial_state();
  traj.initial_energy = stepper.energy(traj.initial);
  traj.final_state = traj.initial;
  if (options.keep_states) traj.states.push_back(traj.initial);
  const int n = config.num_steps();
  traj.reports.reserve(n);
  for (int k = 0; k < n; ++k) {
    try {
      auto [next, rep] = stepper.step(traj.final_state);
      traj.final_state = std::move(next);
      traj.reports.push_back(rep);
    } catch (const std::exception& e) {
      traj.failure = std::current_exception();
      traj.failure_message = e.what();
      break;
    }
    if (options.keep_states) traj.states.push_back(traj.final_state);
    if (options.on_step) options.on_step(traj.final_state, traj.reports.back());
  }
  return traj;
}

}  // namespace savmhd
