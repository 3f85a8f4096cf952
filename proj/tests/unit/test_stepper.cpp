#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "savmhd/diagnostics.hpp"
#include "savmhd/sav_stepper.hpp"
#include "savmhd/verification.hpp"

using namespace savmhd;

namespace {

ProblemDefinition zero_problem(double t_final) {
  ProblemDefinition p;
  p.name = "zero";
  p.t_final = t_final;
  return p;
}

}  // namespace

TEST_SUITE("stepper") {

TEST_CASE("config validation") {
  SchemeConfig c;
  c.tau = 0.3;
  c.t_final = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.tau = 0.25;
  CHECK_NOTHROW(c.validate());
  CHECK(c.num_steps() == 4);
  c.order = 3;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.order = 1;
  c.re = -1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("zero data follows the closed-form q recursion") {
  const Discretization d(build_unit_square_mesh(3));
  const double t_final = 2.0, tau = 0.25;
  const ProblemDefinition p = zero_problem(t_final);
  for (int order : {1, 2}) {
    const Trajectory tr = run(d, p, SchemeConfig::for_problem(p, order, tau));
    REQUIRE(tr.completed());
    CHECK(norm_inf(tr.initial.j.coeffs) == 0.0);
    CHECK(norm_inf(tr.initial.phi.coeffs) == 0.0);
    double q = 1.0;
    double q_prev = 1.0;
    for (const StepReport& r : tr.reports) {
      double q_next;
      if (order == 1 || r.step == 1) {
        q_next = q * t_final / (t_final + tau);
      } else {
        // (3q' - 4q + q_prev) / (2 tau) = -q' / T
        q_next = (4 * q - q_prev) / (3.0 + 2.0 * tau / t_final);
      }
      CHECK(r.a1 == 0.0);
      CHECK(r.a2 == 0.0);
      CHECK(r.energy == doctest::Approx(0.5 * q_next * q_next).epsilon(1e-14));
      CHECK(r.s == doctest::Approx(q_next * std::exp(r.t / t_final)).epsilon(1e-14));
      q_prev = q;
      q = q_next;
    }
    CHECK(tr.final_state.q == doctest::Approx(q).epsilon(1e-14));
    CHECK(norm_inf(tr.final_state.u.coeffs) == 0.0);
    const EnergyTrace trace = energy_trace(tr);
    CHECK(!first_energy_increase(trace));
  }
}

TEST_CASE("second order with one step equals first order") {
  const Discretization d(build_unit_square_mesh(3));
  ProblemDefinition p = accuracy_problem_2d();
  p.t_final = 0.1;
  const Trajectory a = run(d, p, SchemeConfig::for_problem(p, 1, 0.1));
  const Trajectory b = run(d, p, SchemeConfig::for_problem(p, 2, 0.1));
  REQUIRE(a.completed());
  REQUIRE(b.completed());
  CHECK(a.final_state.u.coeffs == b.final_state.u.coeffs);
  CHECK(a.final_state.j.coeffs == b.final_state.j.coeffs);
  CHECK(a.final_state.q == b.final_state.q);
}

TEST_CASE("single run equals one manual step") {
  const Discretization d(build_unit_square_mesh(3));
  ProblemDefinition p = stability_problem_2d(20, 20);
  p.t_final = 0.1;
  const SchemeConfig c = SchemeConfig::for_problem(p, 1, 0.1);
  const Trajectory tr = run(d, p, c, {.keep_states = true});
  const SavStepper stepper(d, p, c);
  const auto [next, report] = stepper.step_first_order(stepper.initial_state());
  CHECK(tr.final_state.u.coeffs == next.u.coeffs);
  CHECK(tr.states.size() == 2);
  CHECK(report.energy == doctest::Approx(stepper.energy(next)).epsilon(1e-15));
  const double uu = quadratic_form(stepper.mass(), next.u.coeffs);
  CHECK(report.energy == doctest::Approx(0.5 * uu + 0.5 * next.q * next.q).epsilon(1e-14));
}

TEST_CASE("BDF2 step needs a previous level") {
  const Discretization d(build_unit_square_mesh(2));
  const ProblemDefinition p = stability_problem_2d(20, 20);
  const SavStepper s(d, p, SchemeConfig::for_problem(p, 2, 0.1));
  CHECK_THROWS(s.step_second_order(s.initial_state()));
}

TEST_CASE("vortex run: solvability, identities, charge, decay") {
  const Discretization d(build_unit_square_mesh(8));
  const ProblemDefinition p = stability_problem_2d(20, 20);
  for (int order : {1, 2}) {
    const Trajectory tr = run(d, p, SchemeConfig::for_problem(p, order, 0.1));
    REQUIRE(tr.completed());
    double e = tr.initial_energy;
    for (const StepReport& r : tr.reports) {
      CHECK(r.denominator > 0.0);
      CHECK(r.a2_identity_defect <= 1e-10);
      CHECK(r.max_div_j <= 1e-9);
      if (order == 1) {
        CHECK(std::abs(r.energy_identity_residual) <= 1e-8);
        CHECK(r.energy <= e + 1e-12);
      }
      e = r.energy;
    }
  }
}

TEST_CASE("initial current of the vortex is solenoidal") {
  const Discretization d(build_unit_square_mesh(8));
  const ProblemDefinition p = stability_problem_2d(20, 20);
  const SavStepper s(d, p, SchemeConfig::for_problem(p, 1, 0.1));
  const SavState init = s.initial_state();
  for (int t = 0; t < d.num_triangles(); ++t) CHECK(std::abs(current_divergence(d, init.j.coeffs, t)) < 1e-10);
}

TEST_CASE("initial current of the manufactured problem") {
  const Discretization d(build_unit_square_mesh(6));
  const ProblemDefinition p = accuracy_problem_2d();
  const SavStepper s(d, p, SchemeConfig::for_problem(p, 1, 0.1));
  const SavState init = s.initial_state();
  const FieldVector ref = interpolate_current(d, p.exact->j, 0.0);
  CHECK(verify::max_abs_difference(init.j.coeffs, ref.coeffs) < d.mesh().h());
}

TEST_CASE("reconstruction satisfies the coupled scheme") {
  const Discretization d(build_unit_square_mesh(3));
  const ProblemDefinition p = accuracy_problem_2d();
  for (int order : {1, 2}) {
    const SchemeConfig c = SchemeConfig::for_problem(p, order, 0.1);
    const Trajectory tr = run(d, p, c, {.keep_states = true});
    REQUIRE(tr.completed());
    for (std::size_t k = 0; k + 1 < tr.states.size(); ++k)
      CHECK(verify::coupled_residual(d, p, c, tr.states[k], tr.states[k + 1]).max() <= 1e-8);
  }
}

TEST_CASE("coarse manufactured run is fast") {
  const Discretization d(build_unit_square_mesh(6));
  const ProblemDefinition p = accuracy_problem_2d();
  const Trajectory tr = run(d, p, SchemeConfig::for_problem(p, 1, 0.2));
  CHECK(tr.completed());
  CHECK(tr.reports.size() == 5);
}

}
