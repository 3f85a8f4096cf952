#include <doctest.h>

#include <vector>

#include "savmhd/errors.hpp"
#include "savmhd/fem.hpp"
#include "savmhd/linsolve.hpp"
#include "savmhd/verification.hpp"

using namespace savmhd;

namespace {

struct StokesFixture {
  Discretization disc{build_unit_square_mesh(2)};
  SaddleSystem system = make_stokes_system(disc, assemble_velocity_mass(disc), assemble_velocity_stiffness(disc),
                                           assemble_velocity_pressure_div(disc), 5.0, 0.5);
};

}  // namespace

TEST_SUITE("linsolve") {

TEST_CASE("stokes system prepares and reports its shape") {
  StokesFixture f;
  const SaddleSolver s(f.system);
  CHECK(s.size() == f.system.size());
  CHECK(s.constrained_operator().symmetry_defect() < 1e-15);
}

TEST_CASE("potential block without mean constraint is singular") {
  const Discretization d(build_unit_square_mesh(2));
  SaddleSystem sys = make_darcy_system(d, assemble_rt0_mass(d), assemble_rt0_div(d));
  sys.mean_row.clear();
  CHECK_THROWS_AS(SaddleSolver{sys}, SingularSystemError);
}

TEST_CASE("zero right-hand side gives zero") {
  StokesFixture f;
  const SaddleSolver s(f.system);
  const std::vector<double> b(s.size(), 0.0);
  const auto x = s.solve(b);
  CHECK(norm_inf(x) == 0.0);
}

TEST_CASE("repeated preparation is idempotent") {
  StokesFixture f;
  const SaddleSolver a(f.system), b(f.system);
  const std::vector<double> rhs = verify::random_vector(f.system.size(), 3);
  CHECK(a.solve(rhs) == b.solve(rhs));
  const SaddleSolver copy = a;
  CHECK(copy.solve(rhs) == a.solve(rhs));
}

TEST_CASE("agrees with dense elimination") {
  StokesFixture f;
  const SaddleSolver s(f.system);
  const auto fp = verify::random_vector(f.system.primal_size(), 11);
  const auto gd = verify::random_vector(f.system.dual_size(), 12);
  const auto fixed = verify::random_vector(f.system.fixed_dofs.size(), 13);
  for (Accuracy acc : {Accuracy::Standard, Accuracy::Extended}) {
    const SaddleSolution sol = s.solve(fp, gd, fixed, acc);
    const auto ref = verify::reference_saddle_solve(f.system, fp, gd, fixed);
    std::vector<double> got = sol.primal;
    got.insert(got.end(), sol.dual.begin(), sol.dual.end());
    CHECK(verify::max_abs_difference(got, ref) < 1e-9);
    CHECK(sol.relative_residual <= SaddleSolver::kResidualTolerance);
    CHECK(std::abs(dot(sol.dual, f.system.mean_row)) < 1e-12);
  }
}

TEST_CASE("darcy solve matches dense elimination") {
  const Discretization d(build_unit_square_mesh(3));
  const SaddleSystem sys = make_darcy_system(d, assemble_rt0_mass(d), assemble_rt0_div(d));
  const SaddleSolver s(sys);
  const auto fp = verify::random_vector(sys.primal_size(), 21);
  const std::vector<double> gd(sys.dual_size(), 0.0);
  const std::vector<double> fixed(sys.fixed_dofs.size(), 0.0);
  const SaddleSolution sol = s.solve(fp, gd, fixed);
  const auto ref = verify::reference_saddle_solve(sys, fp, gd, fixed);
  std::vector<double> got = sol.primal;
  got.insert(got.end(), sol.dual.begin(), sol.dual.end());
  CHECK(verify::max_abs_difference(got, ref) < 1e-9);
  for (int t = 0; t < d.num_triangles(); ++t) CHECK(std::abs(current_divergence(d, sol.primal, t)) < 1e-12);
}

TEST_CASE("residual contract on a larger system") {
  const Discretization d(build_unit_square_mesh(16));
  const SaddleSystem sys = make_stokes_system(d, assemble_velocity_mass(d), assemble_velocity_stiffness(d),
                                              assemble_velocity_pressure_div(d), 100.0, 0.01);
  const SaddleSolver s(sys);
  const auto rhs = verify::random_vector(sys.size(), 5);
  const auto x = s.solve(rhs);
  const auto r = residual_compensated(s.constrained_operator(), x, rhs);
  CHECK(norm2(r) <= 1e-10 * norm2(rhs));
}

}
