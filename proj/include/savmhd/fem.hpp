#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "savmhd/linsolve.hpp"
#include "savmhd/mesh.hpp"
#include "savmhd/sparse.hpp"

namespace savmhd {

using Vec2 = std::array<double, 2>;
/// Row-major 2x2 Jacobian: {d1/dx, d1/dy, d2/dx, d2/dy}.
using Mat2 = std::array<double, 4>;

using ScalarField = std::function<double(double x, double y, double t)>;
using VectorField = std::function<Vec2(double x, double y, double t)>;
using TensorField = std::function<Mat2(double x, double y, double t)>;

/// The four discrete spaces: Mini velocity (P1 + cubic bubble, two
/// components), continuous P1 pressure, lowest-order Raviart-Thomas current
/// density, piecewise-constant potential.
enum class Space { Velocity, Pressure, Current, Potential };

const char* to_string(Space space);

/// Velocity dofs are component-major: [u_x vertices, u_x bubbles, u_y
/// vertices, u_y bubbles]. Current dofs are total fluxes across edges in the
/// global low->high orientation (normal = tangent rotated clockwise).
struct DofLayout {
  int n_vertices = 0;
  int n_triangles = 0;
  int n_velocity = 0;
  int n_pressure = 0;
  int n_current = 0;
  int n_potential = 0;
  std::vector<int> boundary_velocity_dofs;
  std::vector<int> boundary_current_dofs;

  int velocity_vertex_dof(int component, int vertex) const {
    return component * (n_vertices + n_triangles) + vertex;
  }
  int velocity_bubble_dof(int component, int triangle) const {
    return component * (n_vertices + n_triangles) + n_vertices + triangle;
  }
  int size(Space space) const;
};

DofLayout make_dof_layout(const Mesh& mesh);

struct FieldVector {
  Space space = Space::Velocity;
  std::vector<double> coeffs;
};

struct ElementGeometry {
  double area = 0.0;
  std::array<Point, 3> vertices;
  std::array<Vec2, 3> grad_lambda;
};

/// Mesh plus dof layout plus per-element geometry. Immutable after
/// construction; everything downstream takes it by const reference.
class Discretization {
 public:
  explicit Discretization(Mesh mesh);

  const Mesh& mesh() const { return mesh_; }
  const DofLayout& layout() const { return layout_; }
  const ElementGeometry& geometry(int triangle) const { return geometry_[triangle]; }
  int num_triangles() const { return mesh_.num_triangles(); }

  /// Local velocity dofs of a triangle: {x: v0 v1 v2 bubble, y: v0 v1 v2 bubble}.
  std::array<int, 8> velocity_element_dofs(int triangle) const;

  FieldVector zeros(Space space) const;

  /// Physical point for barycentric coordinates on a triangle.
  Point map_to_physical(int triangle, const std::array<double, 3>& bary) const;

  /// Triangle containing (x, y) and its barycentric coordinates.
  std::pair<int, std::array<double, 3>> locate(double x, double y) const;

 private:
  Mesh mesh_;
  DofLayout layout_;
  std::vector<ElementGeometry> geometry_;
};

// ---- pointwise evaluation -------------------------------------------------

struct VelocityValue {
  Vec2 value{};
  Mat2 grad{};
};

VelocityValue evaluate_velocity(const Discretization& disc, std::span<const double> u, int triangle,
                                const std::array<double, 3>& bary);
Vec2 evaluate_current(const Discretization& disc, std::span<const double> j, int triangle,
                      const std::array<double, 3>& bary);
/// Divergence of an RT0 field, constant on each triangle.
double current_divergence(const Discretization& disc, std::span<const double> j, int triangle);
double evaluate_pressure(const Discretization& disc, std::span<const double> p, int triangle,
                         const std::array<double, 3>& bary);

// ---- bilinear forms -------------------------------------------------------

/// (u, v) on the Mini space.
SparseMatrix assemble_velocity_mass(const Discretization& disc);
/// (grad u, grad v); the 1/Re factor is applied by the caller.
SparseMatrix assemble_velocity_stiffness(const Discretization& disc);
/// B[r, v] = (r, div v), pressure x velocity.
SparseMatrix assemble_velocity_pressure_div(const Discretization& disc);
/// (J, K) on RT0.
SparseMatrix assemble_rt0_mass(const Discretization& disc);
/// D[T, e] = (1_T, div psi_e) = orientation sign of e in T.
SparseMatrix assemble_rt0_div(const Discretization& disc);

// ---- right-hand sides -----------------------------------------------------

/// (u . grad u, v) in convective form.
std::vector<double> assemble_convection_rhs(const Discretization& disc, const FieldVector& u);
/// (J x B, v) with B = (0, 0, B3): J x B = (J2 B3, -J1 B3). No kappa.
std::vector<double> assemble_lorentz_rhs(const Discretization& disc, const FieldVector& j, const ScalarField& b3,
                                         double t);
/// (u x B, K) with u x B = (u2 B3, -u1 B3).
std::vector<double> assemble_cross_rhs(const Discretization& disc, const FieldVector& u, const ScalarField& b3,
                                       double t);
/// (f, v) for a given velocity-space load.
std::vector<double> assemble_velocity_load(const Discretization& disc, const VectorField& f, double t);
/// (f, K) for a given current-space load.
std::vector<double> assemble_current_load(const Discretization& disc, const VectorField& f, double t);

/// Weights w with w . c = integral of the field, for Pressure or Potential.
std::vector<double> zero_mean_constraint(const Discretization& disc, Space space);

// ---- interpolation --------------------------------------------------------

/// Vertex interpolant; bubble coefficients are zero.
FieldVector interpolate_velocity(const Discretization& disc, const VectorField& f, double t);
/// Edge fluxes by 3-point Gauss, exact for linear fields.
FieldVector interpolate_current(const Discretization& disc, const VectorField& f, double t);
FieldVector interpolate_pressure(const Discretization& disc, const ScalarField& f, double t);
/// Element averages by quadrature.
FieldVector project_potential(const Discretization& disc, const ScalarField& f, double t);

// ---- boundary data --------------------------------------------------------

/// Values for a set of constrained dofs, aligned with SaddleSystem::fixed_dofs.
struct BoundaryValues {
  std::vector<int> dofs;
  std::vector<double> values;
};

/// Boundary-vertex velocity values; homogeneous when `g` is empty.
BoundaryValues velocity_boundary_values(const Discretization& disc, const VectorField& g, double t);
/// Boundary-edge fluxes of `jb` (its normal trace); homogeneous when empty.
BoundaryValues current_boundary_fluxes(const Discretization& disc, const VectorField& jb, double t);

/// Marks every boundary-vertex velocity dof as constrained. Bubble dofs are
/// interior and stay free.
SaddleSystem& apply_velocity_dirichlet(SaddleSystem& system, const Discretization& disc);
/// Marks every boundary-edge current dof as constrained.
SaddleSystem& apply_current_normal_trace(SaddleSystem& system, const Discretization& disc);

/// 1/2 * boundary integral of (u_b . n) |u_b|^2, 3-point Gauss per edge.
double boundary_kinetic_flux(const Discretization& disc, const VectorField& ub, double t);

// ---- saddle systems -------------------------------------------------------

/// [c M + nu K, -B^T; -B, 0] with pressure mean constraint and velocity
/// Dirichlet rows on the whole boundary.
SaddleSystem make_stokes_system(const Discretization& disc, const SparseMatrix& mass, const SparseMatrix& stiffness,
                                const SparseMatrix& div, double mass_coefficient, double viscosity);
/// [M_J, -D^T; -D, 0] with potential mean constraint and normal-trace rows on
/// the whole boundary.
SaddleSystem make_darcy_system(const Discretization& disc, const SparseMatrix& rt_mass, const SparseMatrix& rt_div);

}  // namespace savmhd
