#include "savmhd/fem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "savmhd/quadrature.hpp"

namespace savmhd {

const char* to_string(Space space) {
  switch (space) {
    case Space::Velocity: return "velocity";
    case Space::Pressure: return "pressure";
    case Space::Current: return "current";
    case Space::Potential: return "potential";
  }
  return "unknown";
}

int DofLayout::size(Space space) const {
  switch (space) {
    case Space::Velocity: return n_velocity;
    case Space::Pressure: return n_pressure;
    case Space::Current: return n_current;
    case Space::Potential: return n_potential;
  }
  return 0;
}

DofLayout make_dof_layout(const Mesh& mesh) {
  DofLayout layout;
  layout.n_vertices = mesh.num_vertices();
  layout.n_triangles = mesh.num_triangles();
  layout.n_velocity = 2 * (layout.n_vertices + layout.n_triangles);
  layout.n_pressure = layout.n_vertices;
  layout.n_current = mesh.num_edges();
  layout.n_potential = layout.n_triangles;
  for (int c = 0; c < 2; ++c) {
    for (int v = 0; v < layout.n_vertices; ++v) {
      if (mesh.boundary_vertex[v]) layout.boundary_velocity_dofs.push_back(layout.velocity_vertex_dof(c, v));
    }
  }
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.boundary_edge[e]) layout.boundary_current_dofs.push_back(e);
  }
  return layout;
}

Discretization::Discretization(Mesh mesh) : mesh_(std::move(mesh)), layout_(make_dof_layout(mesh_)) {
  geometry_.resize(mesh_.num_triangles());
  for (int t = 0; t < mesh_.num_triangles(); ++t) {
    ElementGeometry& g = geometry_[t];
    for (int k = 0; k < 3; ++k) g.vertices[k] = mesh_.vertices[mesh_.triangles[t][k]];
    g.area = mesh_.signed_area(t);
    if (!(g.area > 0.0)) {
      throw std::invalid_argument("Discretization: triangle " + std::to_string(t) + " has non-positive area");
    }
    for (int k = 0; k < 3; ++k) {
      const Point& a = g.vertices[(k + 1) % 3];
      const Point& b = g.vertices[(k + 2) % 3];
      g.grad_lambda[k] = {(a.y - b.y) / (2.0 * g.area), (b.x - a.x) / (2.0 * g.area)};
    }
  }
}

std::array<int, 8> Discretization::velocity_element_dofs(int t) const {
  const auto& tri = mesh_.triangles[t];
  std::array<int, 8> dofs{};
  for (int c = 0; c < 2; ++c) {
    for (int k = 0; k < 3; ++k) dofs[4 * c + k] = layout_.velocity_vertex_dof(c, tri[k]);
    dofs[4 * c + 3] = layout_.velocity_bubble_dof(c, t);
  }
  return dofs;
}

FieldVector Discretization::zeros(Space space) const {
  return FieldVector{space, std::vector<double>(layout_.size(space), 0.0)};
}

Point Discretization::map_to_physical(int t, const std::array<double, 3>& bary) const {
  const auto& v = geometry_[t].vertices;
  return {bary[0] * v[0].x + bary[1] * v[1].x + bary[2] * v[2].x,
          bary[0] * v[0].y + bary[1] * v[1].y + bary[2] * v[2].y};
}

std::pair<int, std::array<double, 3>> Discretization::locate(double x, double y) const {
  const int n = mesh_.n_subdiv;
  const int i = std::clamp(static_cast<int>(std::floor(x * n)), 0, n - 1);
  const int j = std::clamp(static_cast<int>(std::floor(y * n)), 0, n - 1);
  const double fx = x * n - i;
  const double fy = y * n - j;
  const int t = 2 * (j * n + i) + (fx >= fy ? 0 : 1);
  const ElementGeometry& g = geometry_[t];
  std::array<double, 3> bary{};
  for (int k = 0; k < 3; ++k) {
    bary[k] = 1.0 + g.grad_lambda[k][0] * (x - g.vertices[k].x) + g.grad_lambda[k][1] * (y - g.vertices[k].y);
  }
  return {t, bary};
}

namespace {

void require(const FieldVector& f, Space space, const Discretization& disc, const char* who) {
  if (f.space != space || static_cast<int>(f.coeffs.size()) != disc.layout().size(space)) {
    throw std::invalid_argument(std::string(who) + ": expected a " + to_string(space) + " field of length " +
                                std::to_string(disc.layout().size(space)));
  }
}

/// Scalar Mini shape functions on one element at one point: three hat
/// functions and the bubble 27 l0 l1 l2.
struct MiniShape {
  std::array<double, 4> value;
  std::array<Vec2, 4> grad;
};

MiniShape mini_shape(const ElementGeometry& g, const std::array<double, 3>& l) {
  MiniShape s{};
  for (int k = 0; k < 3; ++k) {
    s.value[k] = l[k];
    s.grad[k] = g.grad_lambda[k];
  }
  s.value[3] = 27.0 * l[0] * l[1] * l[2];
  const double c0 = 27.0 * l[1] * l[2];
  const double c1 = 27.0 * l[0] * l[2];
  const double c2 = 27.0 * l[0] * l[1];
  for (int d = 0; d < 2; ++d) {
    s.grad[3][d] = c0 * g.grad_lambda[0][d] + c1 * g.grad_lambda[1][d] + c2 * g.grad_lambda[2][d];
  }
  return s;
}

/// Global RT0 basis functions of one element at a physical point, signs included.
std::array<Vec2, 3> rt0_shape(const ElementGeometry& g, const std::array<EdgeRef, 3>& edges, const Point& x) {
  std::array<Vec2, 3> phi{};
  for (int k = 0; k < 3; ++k) {
    const double scale = edges[k].sign / (2.0 * g.area);
    phi[k] = {scale * (x.x - g.vertices[k].x), scale * (x.y - g.vertices[k].y)};
  }
  return phi;
}

}  // namespace

VelocityValue evaluate_velocity(const Discretization& disc, std::span<const double> u, int t,
                                const std::array<double, 3>& bary) {
  const MiniShape s = mini_shape(disc.geometry(t), bary);
  const auto dofs = disc.velocity_element_dofs(t);
  VelocityValue out;
  for (int c = 0; c < 2; ++c) {
    for (int a = 0; a < 4; ++a) {
      const double coef = u[dofs[4 * c + a]];
      out.value[c] += coef * s.value[a];
      out.grad[2 * c] += coef * s.grad[a][0];
      out.grad[2 * c + 1] += coef * s.grad[a][1];
    }
  }
  return out;
}

Vec2 evaluate_current(const Discretization& disc, std::span<const double> j, int t,
                      const std::array<double, 3>& bary) {
  const auto& edges = disc.mesh().triangle_edges[t];
  const auto phi = rt0_shape(disc.geometry(t), edges, disc.map_to_physical(t, bary));
  Vec2 out{};
  for (int k = 0; k < 3; ++k) {
    out[0] += j[edges[k].index] * phi[k][0];
    out[1] += j[edges[k].index] * phi[k][1];
  }
  return out;
}

double current_divergence(const Discretization& disc, std::span<const double> j, int t) {
  const auto& edges = disc.mesh().triangle_edges[t];
  double flux = 0.0;
  for (int k = 0; k < 3; ++k) flux += edges[k].sign * j[edges[k].index];
  return flux / disc.geometry(t).area;
}

double evaluate_pressure(const Discretization& disc, std::span<const double> p, int t,
                         const std::array<double, 3>& bary) {
  const auto& tri = disc.mesh().triangles[t];
  return bary[0] * p[tri[0]] + bary[1] * p[tri[1]] + bary[2] * p[tri[2]];
}

SparseMatrix assemble_velocity_mass(const Discretization& disc) {
  const QuadratureRule& rule = triangle_rule_degree6();
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(disc.num_triangles()) * 32);
  for (int e = 0; e < disc.num_triangles(); ++e) {
    const ElementGeometry& g = disc.geometry(e);
    std::array<std::array<double, 4>, 4> local{};
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const MiniShape s = mini_shape(g, rule.points[q]);
      const double w = rule.weights[q] * 2.0 * g.area;
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) local[a][b] += w * s.value[a] * s.value[b];
      }
    }
    const auto dofs = disc.velocity_element_dofs(e);
    for (int c = 0; c < 2; ++c) {
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) t.push_back({dofs[4 * c + a], dofs[4 * c + b], local[a][b]});
      }
    }
  }
  const int n = disc.layout().n_velocity;
  return SparseMatrix::from_triplets(n, n, t);
}

SparseMatrix assemble_velocity_stiffness(const Discretization& disc) {
  const QuadratureRule& rule = triangle_rule_degree6();
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(disc.num_triangles()) * 32);
  for (int e = 0; e < disc.num_triangles(); ++e) {
    const ElementGeometry& g = disc.geometry(e);
    std::array<std::array<double, 4>, 4> local{};
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const MiniShape s = mini_shape(g, rule.points[q]);
      const double w = rule.weights[q] * 2.0 * g.area;
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
          local[a][b] += w * (s.grad[a][0] * s.grad[b][0] + s.grad[a][1] * s.grad[b][1]);
        }
      }
    }
    const auto dofs = disc.velocity_element_dofs(e);
    for (int c = 0; c < 2; ++c) {
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) t.push_back({dofs[4 * c + a], dofs[4 * c + b], local[a][b]});
      }
    }
  }
  const int n = disc.layout().n_velocity;
  return SparseMatrix::from_triplets(n, n, t);
}

SparseMatrix assemble_velocity_pressure_div(const Discretization& disc) {
  const QuadratureRule& rule = triangle_rule_degree6();
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(disc.num_triangles()) * 24);
  for (int e = 0; e < disc.num_triangles(); ++e) {
    const ElementGeometry& g = disc.geometry(e);
    const auto& tri = disc.mesh().triangles[e];
    const auto dofs = disc.velocity_element_dofs(e);
    std::array<std::array<double, 8>, 3> local{};
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& l = rule.points[q];
      const MiniShape s = mini_shape(g, l);
      const double w = rule.weights[q] * 2.0 * g.area;
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 2; ++c) {
          for (int a = 0; a < 4; ++a) local[r][4 * c + a] += w * l[r] * s.grad[a][c];
        }
      }
    }
    for (int r = 0; r < 3; ++r) {
      for (int k = 0; k < 8; ++k) t.push_back({tri[r], dofs[k], local[r][k]});
    }
  }
  return SparseMatrix::from_triplets(disc.layout().n_pressure, disc.layout().n_velocity, t);
}

SparseMatrix assemble_rt0_mass(const Discretization& disc) {
  const QuadratureRule& rule = triangle_rule_degree6();
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(disc.num_triangles()) * 9);
  for (int e = 0; e < disc.num_triangles(); ++e) {
    const ElementGeometry& g = disc.geometry(e);
    const auto& edges = disc.mesh().triangle_edges[e];
    std::array<std::array<double, 3>, 3> local{};
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto phi = rt0_shape(g, edges, disc.map_to_physical(e, rule.points[q]));
      const double w = rule.weights[q] * 2.0 * g.area;
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) local[a][b] += w * (phi[a][0] * phi[b][0] + phi[a][1] * phi[b][1]);
      }
    }
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) t.push_back({edges[a].index, edges[b].index, local[a][b]});
    }
  }
  const int n = disc.layout().n_current;
  return SparseMatrix::from_triplets(n, n, t);
}

SparseMatrix assemble_rt0_div(const Discretization& disc) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(disc.num_triangles()) * 3);
  for (int e = 0; e < disc.num_triangles(); ++e) {
    for (const EdgeRef& ref : disc.mesh().triangle_edges[e]) t.push_back({e, ref.index, static_cast<double>(ref.sign)});
  }
  return SparseMatrix::from_triplets(disc.layout().n_potential, disc.layout().n_current, t);
}

namespace {

/// Accumulates (w(x), v) over the velocity space for a pointwise vector load
/// computed by `load(triangle, bary, x)`.
template <typename Load>
std::vector<double> velocity_rhs(const Discretization& disc, Load&& load) {
  const QuadratureRule& rule = triangle_rule_degree6();
  std::vector<double> rhs(disc.layout().n_velocity, 0.0);
  for (int e = 0; e < disc.num_triangles(); ++e) {
    const ElementGeometry& g = disc.geometry(e);
    const auto dofs = disc.velocity_element_dofs(e);
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& l = rule.points[q];
      const MiniShape s = mini_shape(g, l);
      const Vec2 f = load(e, l, disc.map_to_physical(e, l));
      const double w = rule.weights[q] * 2.0 * g.area;
      for (int c = 0; c < 2; ++c) {
        for (int a = 0; a < 4; ++a) rhs[dofs[4 * c + a]] += w * f[c] * s.value[a];
      }
    }
  }
  return rhs;
}

template <typename Load>
std::vector<double> current_rhs(const Discretization& disc, Load&& load) {
  const QuadratureRule& rule = triangle_rule_degree6();
  std::vector<double> rhs(disc.layout().n_current, 0.0);
  for (int e = 0; e < disc.num_triangles(); ++e) {
    const ElementGeometry& g = disc.geometry(e);
    const auto& edges = disc.mesh().triangle_edges[e];
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& l = rule.points[q];
      const Point x = disc.map_to_physical(e, l);
      const auto phi = rt0_shape(g, edges, x);
      const Vec2 f = load(e, l, x);
      const double w = rule.weights[q] * 2.0 * g.area;
      for (int a = 0; a < 3; ++a) rhs[edges[a].index] += w * (f[0] * phi[a][0] + f[1] * phi[a][1]);
    }
  }
  return rhs;
}

}  // namespace

std::vector<double> assemble_convection_rhs(const Discretization& disc, const FieldVector& u) {
  require(u, Space::Velocity, disc, "assemble_convection_rhs");
  return velocity_rhs(disc, [&](int e, const std::array<double, 3>& l, const Point&) -> Vec2 {
    const VelocityValue v = evaluate_velocity(disc, u.coeffs, e, l);
    return {v.value[0] * v.grad[0] + v.value[1] * v.grad[1], v.value[0] * v.grad[2] + v.value[1] * v.grad[3]};
  });
}

std::vector<double> assemble_lorentz_rhs(const Discretization& disc, const FieldVector& j, const ScalarField& b3,
                                         double t) {
  require(j, Space::Current, disc, "assemble_lorentz_rhs");
  return velocity_rhs(disc, [&](int e, const std::array<double, 3>& l, const Point& x) -> Vec2 {
    const Vec2 jv = evaluate_current(disc, j.coeffs, e, l);
    const double b = b3(x.x, x.y, t);
    return {jv[1] * b, -jv[0] * b};
  });
}

std::vector<double> assemble_cross_rhs(const Discretization& disc, const FieldVector& u, const ScalarField& b3,
                                       double t) {
  require(u, Space::Velocity, disc, "assemble_cross_rhs");
  return current_rhs(disc, [&](int e, const std::array<double, 3>& l, const Point& x) -> Vec2 {
    const VelocityValue v = evaluate_velocity(disc, u.coeffs, e, l);
    const double b = b3(x.x, x.y, t);
    return {v.value[1] * b, -v.value[0] * b};
  });
}

std::vector<double> assemble_velocity_load(const Discretization& disc, const VectorField& f, double t) {
  return velocity_rhs(disc, [&](int, const std::array<double, 3>&, const Point& x) { return f(x.x, x.y, t); });
}

std::vector<double> assemble_current_load(const Discretization& disc, const VectorField& f, double t) {
  return current_rhs(disc, [&](int, const std::array<double, 3>&, const Point& x) { return f(x.x, x.y, t); });
}

std::vector<double> zero_mean_constraint(const Discretization& disc, Space space) {
  const Mesh& mesh = disc.mesh();
  switch (space) {
    case Space::Pressure: {
      std::vector<double> w(disc.layout().n_pressure, 0.0);
      for (int e = 0; e < mesh.num_triangles(); ++e) {
        for (int v : mesh.triangles[e]) w[v] += disc.geometry(e).area / 3.0;
      }
      return w;
    }
    case Space::Potential: {
      std::vector<double> w(disc.layout().n_potential);
      for (int e = 0; e < mesh.num_triangles(); ++e) w[e] = disc.geometry(e).area;
      return w;
    }
    default:
      throw std::invalid_argument(std::string("zero_mean_constraint: no mean constraint for ") + to_string(space));
  }
}

FieldVector interpolate_velocity(const Discretization& disc, const VectorField& f, double t) {
  FieldVector out = disc.zeros(Space::Velocity);
  const DofLayout& layout = disc.layout();
  for (int v = 0; v < layout.n_vertices; ++v) {
    const Point& p = disc.mesh().vertices[v];
    const Vec2 val = f(p.x, p.y, t);
    out.coeffs[layout.velocity_vertex_dof(0, v)] = val[0];
    out.coeffs[layout.velocity_vertex_dof(1, v)] = val[1];
  }
  return out;
}

namespace {

/// Integral of f . n over edge e, n the global normal scaled by edge length.
double edge_flux(const Mesh& mesh, int e, const VectorField& f, double t) {
  const LineRule& line = gauss_legendre3();
  const Point& a = mesh.vertices[mesh.edges[e][0]];
  const Point& b = mesh.vertices[mesh.edges[e][1]];
  const double tx = b.x - a.x;
  const double ty = b.y - a.y;
  double flux = 0.0;
  for (int q = 0; q < 3; ++q) {
    const double s = line.points[q];
    const Vec2 val = f(a.x + s * tx, a.y + s * ty, t);
    flux += line.weights[q] * (val[0] * ty - val[1] * tx);
  }
  return flux;
}

}  // namespace

FieldVector interpolate_current(const Discretization& disc, const VectorField& f, double t) {
  FieldVector out = disc.zeros(Space::Current);
  for (int e = 0; e < disc.mesh().num_edges(); ++e) out.coeffs[e] = edge_flux(disc.mesh(), e, f, t);
  return out;
}

FieldVector interpolate_pressure(const Discretization& disc, const ScalarField& f, double t) {
  FieldVector out = disc.zeros(Space::Pressure);
  for (int v = 0; v < disc.layout().n_vertices; ++v) {
    const Point& p = disc.mesh().vertices[v];
    out.coeffs[v] = f(p.x, p.y, t);
  }
  return out;
}

FieldVector project_potential(const Discretization& disc, const ScalarField& f, double t) {
  const QuadratureRule& rule = triangle_rule_degree6();
  FieldVector out = disc.zeros(Space::Potential);
  for (int e = 0; e < disc.num_triangles(); ++e) {
    double avg = 0.0;
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const Point x = disc.map_to_physical(e, rule.points[q]);
      avg += 2.0 * rule.weights[q] * f(x.x, x.y, t);
    }
    out.coeffs[e] = avg;
  }
  return out;
}

BoundaryValues velocity_boundary_values(const Discretization& disc, const VectorField& g, double t) {
  const DofLayout& layout = disc.layout();
  BoundaryValues out;
  out.dofs = layout.boundary_velocity_dofs;
  out.values.assign(out.dofs.size(), 0.0);
  if (!g) return out;
  const int stride = layout.n_vertices + layout.n_triangles;
  for (std::size_t k = 0; k < out.dofs.size(); ++k) {
    const int component = out.dofs[k] / stride;
    const Point& p = disc.mesh().vertices[out.dofs[k] - component * stride];
    out.values[k] = g(p.x, p.y, t)[component];
  }
  return out;
}

BoundaryValues current_boundary_fluxes(const Discretization& disc, const VectorField& jb, double t) {
  BoundaryValues out;
  out.dofs = disc.layout().boundary_current_dofs;
  out.values.assign(out.dofs.size(), 0.0);
  if (!jb) return out;
  for (std::size_t k = 0; k < out.dofs.size(); ++k) out.values[k] = edge_flux(disc.mesh(), out.dofs[k], jb, t);
  return out;
}

SaddleSystem& apply_velocity_dirichlet(SaddleSystem& system, const Discretization& disc) {
  system.fixed_dofs = disc.layout().boundary_velocity_dofs;
  return system;
}

SaddleSystem& apply_current_normal_trace(SaddleSystem& system, const Discretization& disc) {
  system.fixed_dofs = disc.layout().boundary_current_dofs;
  return system;
}

double boundary_kinetic_flux(const Discretization& disc, const VectorField& ub, double t) {
  if (!ub) return 0.0;
  const Mesh& mesh = disc.mesh();
  const LineRule& line = gauss_legendre3();
  double total = 0.0;
  for (int e = 0; e < mesh.num_triangles(); ++e) {
    const auto& tri = mesh.triangles[e];
    for (int k = 0; k < 3; ++k) {
      if (!mesh.boundary_edge[mesh.triangle_edges[e][k].index]) continue;
      // Traversal a -> b of a counter-clockwise triangle: outward normal is the
      // tangent rotated clockwise.
      const Point& a = mesh.vertices[tri[(k + 1) % 3]];
      const Point& b = mesh.vertices[tri[(k + 2) % 3]];
      const double tx = b.x - a.x;
      const double ty = b.y - a.y;
      for (int q = 0; q < 3; ++q) {
        const double s = line.points[q];
        const Vec2 u = ub(a.x + s * tx, a.y + s * ty, t);
        const double un = u[0] * ty - u[1] * tx;  // includes |e|
        total += line.weights[q] * un * (u[0] * u[0] + u[1] * u[1]);
      }
    }
  }
  return 0.5 * total;
}

SaddleSystem make_stokes_system(const Discretization& disc, const SparseMatrix& mass, const SparseMatrix& stiffness,
                                const SparseMatrix& div, double mass_coefficient, double viscosity) {
  SaddleSystem s;
  s.a_block = add(mass_coefficient, mass, viscosity, stiffness);
  s.b_block = div.scaled(-1.0);
  s.mean_row = zero_mean_constraint(disc, Space::Pressure);
  apply_velocity_dirichlet(s, disc);
  return s;
}

SaddleSystem make_darcy_system(const Discretization& disc, const SparseMatrix& rt_mass, const SparseMatrix& rt_div) {
  SaddleSystem s;
  s.a_block = rt_mass;
  s.b_block = rt_div.scaled(-1.0);
  s.mean_row = zero_mean_constraint(disc, Space::Potential);
  apply_current_normal_trace(s, disc);
  return s;
}

}  // namespace savmhd
