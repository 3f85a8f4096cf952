#include "savmhd/verification.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "savmhd/diagnostics.hpp"
#include "savmhd/errors.hpp"
#include "savmhd/mesh.hpp"
#include "savmhd/quadrature.hpp"

namespace savmhd::verify {

namespace {

using Eigen::Matrix3d;
using Eigen::Vector3d;

// Collapsed Gauss product rule on the reference triangle {xi, eta >= 0,
// xi + eta <= 1}: (xi, eta) = (s, t (1 - s)), weight w_s w_t (1 - s).
struct RefPoint {
  double xi;
  double eta;
  double weight;
};

const std::vector<RefPoint>& collapsed_rule() {
  static const std::vector<RefPoint> rule = [] {
    const double nodes[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
    const double weights[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
    std::vector<RefPoint> pts;
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        const double s = 0.5 * (1.0 + nodes[a]);
        const double t = 0.5 * (1.0 + nodes[b]);
        pts.push_back({s, t * (1.0 - s), 0.25 * weights[a] * weights[b] * (1.0 - s)});
      }
    }
    return pts;
  }();
  return rule;
}

// Basis functions of one element written in physical monomials.
struct ElementBasis {
  std::array<Point, 3> v;
  double area = 0.0;
  Matrix3d lambda;  // column k: coefficients (c0, cx, cy) of lambda_k
  Matrix3d rt;      // column k: (a1, a2, b) with psi_k = (a1 + b x, a2 + b y)
  std::array<int, 3> edge;

  double lam(int k, double x, double y) const { return lambda(0, k) + lambda(1, k) * x + lambda(2, k) * y; }
  Vec2 grad_lam(int k) const { return {lambda(1, k), lambda(2, k)}; }

  // Mini scalar shapes: hats 0..2, bubble 3.
  void mini(double x, double y, std::array<double, 4>& val, std::array<Vec2, 4>& grad) const {
    const double l0 = lam(0, x, y), l1 = lam(1, x, y), l2 = lam(2, x, y);
    for (int k = 0; k < 3; ++k) {
      val[k] = lam(k, x, y);
      grad[k] = grad_lam(k);
    }
    val[3] = 27.0 * l0 * l1 * l2;
    for (int d = 0; d < 2; ++d) {
      grad[3][d] = 27.0 * (grad_lam(0)[d] * l1 * l2 + l0 * grad_lam(1)[d] * l2 + l0 * l1 * grad_lam(2)[d]);
    }
  }
  Vec2 psi(int k, double x, double y) const { return {rt(0, k) + rt(2, k) * x, rt(1, k) + rt(2, k) * y}; }
  double div_psi(int k) const { return 2.0 * rt(2, k); }
};

ElementBasis element_basis(const Mesh& mesh, int t) {
  ElementBasis e;
  const auto& tri = mesh.triangles[t];
  Matrix3d vander;
  for (int k = 0; k < 3; ++k) {
    e.v[k] = mesh.vertices[tri[k]];
    vander.row(k) << 1.0, e.v[k].x, e.v[k].y;
  }
  e.area = 0.5 * std::abs(vander.determinant());
  e.lambda = vander.inverse();

  // Flux of (a1 + b x, a2 + b y) through edge m with the global normal,
  // exact by the midpoint rule since the normal component is linear.
  Matrix3d flux;
  for (int m = 0; m < 3; ++m) {
    const int ei = mesh.triangle_edges[t][m].index;
    e.edge[m] = ei;
    const Point& lo = mesh.vertices[mesh.edges[ei][0]];
    const Point& hi = mesh.vertices[mesh.edges[ei][1]];
    const double tx = hi.x - lo.x, ty = hi.y - lo.y;
    const double mx = 0.5 * (lo.x + hi.x), my = 0.5 * (lo.y + hi.y);
    flux.row(m) << ty, -tx, mx * ty - my * tx;
  }
  e.rt = flux.inverse();
  return e;
}

template <class F>
void for_each_matrix_point(const ElementBasis& e, F&& f) {
  for (const RefPoint& p : collapsed_rule()) {
    const double l1 = p.xi, l2 = p.eta, l0 = 1.0 - p.xi - p.eta;
    const double x = l0 * e.v[0].x + l1 * e.v[1].x + l2 * e.v[2].x;
    const double y = l0 * e.v[0].y + l1 * e.v[1].y + l2 * e.v[2].y;
    f(x, y, p.weight * 2.0 * e.area);
  }
}

template <class F>
void for_each_rhs_point(const ElementBasis& e, F&& f) {
  const QuadratureRule& rule = triangle_rule_degree6();
  for (std::size_t q = 0; q < rule.weights.size(); ++q) {
    const auto& l = rule.points[q];
    const double x = l[0] * e.v[0].x + l[1] * e.v[1].x + l[2] * e.v[2].x;
    const double y = l[0] * e.v[0].y + l[1] * e.v[1].y + l[2] * e.v[2].y;
    f(x, y, rule.weights[q] * 2.0 * e.area);
  }
}

struct DenseVelocity {
  Vec2 value{};
  Mat2 grad{};
};

DenseVelocity eval_velocity(const Discretization& disc, const ElementBasis& e, int t, std::span<const double> u,
                            double x, double y) {
  std::array<double, 4> val;
  std::array<Vec2, 4> grad;
  e.mini(x, y, val, grad);
  const auto dofs = disc.velocity_element_dofs(t);
  DenseVelocity out;
  for (int c = 0; c < 2; ++c) {
    for (int a = 0; a < 4; ++a) {
      const double coef = u[dofs[4 * c + a]];
      out.value[c] += coef * val[a];
      out.grad[2 * c] += coef * grad[a][0];
      out.grad[2 * c + 1] += coef * grad[a][1];
    }
  }
  return out;
}

Vec2 eval_current(const ElementBasis& e, std::span<const double> j, double x, double y) {
  Vec2 out{};
  for (int k = 0; k < 3; ++k) {
    const Vec2 p = e.psi(k, x, y);
    out[0] += j[e.edge[k]] * p[0];
    out[1] += j[e.edge[k]] * p[1];
  }
  return out;
}

Eigen::MatrixXd as_eigen(const DenseMatrix& a) {
  Eigen::MatrixXd m(a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) m(i, j) = a(i, j);
  return m;
}

}  // namespace

DenseMatrix to_dense(const SparseMatrix& a) {
  DenseMatrix d(a.rows(), a.cols());
  d.data = a.to_dense();
  return d;
}

double max_abs_difference(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows != b.rows || a.cols != b.cols) return std::numeric_limits<double>::infinity();
  return max_abs_difference(std::span<const double>(a.data), std::span<const double>(b.data));
}

double max_abs_difference(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

DenseMatrix reference_velocity_mass(const Discretization& disc) {
  const int n = disc.layout().n_velocity;
  DenseMatrix m(n, n);
  for (int t = 0; t < disc.num_triangles(); ++t) {
    const ElementBasis e = element_basis(disc.mesh(), t);
    const auto dofs = disc.velocity_element_dofs(t);
    for_each_matrix_point(e, [&](double x, double y, double w) {
      std::array<double, 4> val;
      std::array<Vec2, 4> grad;
      e.mini(x, y, val, grad);
      for (int c = 0; c < 2; ++c)
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) m(dofs[4 * c + a], dofs[4 * c + b]) += w * val[a] * val[b];
    });
  }
  return m;
}

DenseMatrix reference_velocity_stiffness(const Discretization& disc) {
  const int n = disc.layout().n_velocity;
  DenseMatrix m(n, n);
  for (int t = 0; t < disc.num_triangles(); ++t) {
    const ElementBasis e = element_basis(disc.mesh(), t);
    const auto dofs = disc.velocity_element_dofs(t);
    for_each_matrix_point(e, [&](double x, double y, double w) {
      std::array<double, 4> val;
      std::array<Vec2, 4> grad;
      e.mini(x, y, val, grad);
      for (int c = 0; c < 2; ++c)
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b)
            m(dofs[4 * c + a], dofs[4 * c + b]) += w * (grad[a][0] * grad[b][0] + grad[a][1] * grad[b][1]);
    });
  }
  return m;
}

DenseMatrix reference_velocity_pressure_div(const Discretization& disc) {
  const DofLayout& layout = disc.layout();
  DenseMatrix m(layout.n_pressure, layout.n_velocity);
  for (int t = 0; t < disc.num_triangles(); ++t) {
    const ElementBasis e = element_basis(disc.mesh(), t);
    const auto dofs = disc.velocity_element_dofs(t);
    const auto& tri = disc.mesh().triangles[t];
    for_each_matrix_point(e, [&](double x, double y, double w) {
      std::array<double, 4> val;
      std::array<Vec2, 4> grad;
      e.mini(x, y, val, grad);
      for (int r = 0; r < 3; ++r) {
        const double pr = e.lam(r, x, y);
        for (int c = 0; c < 2; ++c)
          for (int a = 0; a < 4; ++a) m(tri[r], dofs[4 * c + a]) += w * pr * grad[a][c];
      }
    });
  }
  return m;
}

DenseMatrix reference_rt0_mass(const Discretization& disc) {
  const int n = disc.layout().n_current;
  DenseMatrix m(n, n);
  for (int t = 0; t < disc.num_triangles(); ++t) {
    const ElementBasis e = element_basis(disc.mesh(), t);
    for_each_matrix_point(e, [&](double x, double y, double w) {
      for (int a = 0; a < 3; ++a) {
        const Vec2 pa = e.psi(a, x, y);
        for (int b = 0; b < 3; ++b) {
          const Vec2 pb = e.psi(b, x, y);
          m(e.edge[a], e.edge[b]) += w * (pa[0] * pb[0] + pa[1] * pb[1]);
        }
      }
    });
  }
  return m;
}

DenseMatrix reference_rt0_div(const Discretization& disc) {
  const DofLayout& layout = disc.layout();
  DenseMatrix m(layout.n_potential, layout.n_current);
  for (int t = 0; t < disc.num_triangles(); ++t) {
    const ElementBasis e = element_basis(disc.mesh(), t);
    for_each_matrix_point(e, [&](double, double, double w) {
      for (int a = 0; a < 3; ++a) m(t, e.edge[a]) += w * e.div_psi(a);
    });
  }
  return m;
}

std::vector<double> reference_mean_weights(const Discretization& disc, Space space) {
  const DofLayout& layout = disc.layout();
  if (space != Space::Pressure && space != Space::Potential) {
    throw std::invalid_argument("reference_mean_weights: pressure or potential only");
  }
  std::vector<double> w(layout.size(space), 0.0);
  for (int t = 0; t < disc.num_triangles(); ++t) {
    const ElementBasis e = element_basis(disc.mesh(), t);
    const auto& tri = disc.mesh().triangles[t];
    for_each_matrix_point(e, [&](double x, double y, double wq) {
      if (space == Space::Potential) {
        w[t] += wq;
      } else {
        for (int r = 0; r < 3; ++r) w[tri[r]] += wq * e.lam(r, x, y);
      }
    });
  }
  return w;
}

namespace {

template <class Load>
std::vector<double> reference_velocity_rhs(const Discretization& disc, Load&& load) {
  std::vector<double> out(disc.layout().n_velocity, 0.0);
  for (int t = 0; t < disc.num_triangles(); ++t) {
    const ElementBasis e = element_basis(disc.mesh(), t);
    const auto dofs = disc.velocity_element_dofs(t);
    for_each_rhs_point(e, [&](double x, double y, double w) {
      const Vec2 f = load(t, e, x, y);
      std::array<double, 4> val;
      std::array<Vec2, 4> grad;
      e.mini(x, y, val, grad);
      for (int c = 0; c < 2; ++c)
        for (int a = 0; a < 4; ++a) out[dofs[4 * c + a]] += w * f[c] * val[a];
    });
  }
  return out;
}

}  // namespace

std::vector<double> reference_convection_rhs(const Discretization& disc, std::span<const double> u) {
  return reference_velocity_rhs(disc, [&](int t, const ElementBasis& e, double x, double y) -> Vec2 {
    const DenseVelocity v = eval_velocity(disc, e, t, u, x, y);
    return {v.value[0] * v.grad[0] + v.value[1] * v.grad[1], v.value[0] * v.grad[2] + v.value[1] * v.grad[3]};
  });
}

std::vector<double> reference_lorentz_rhs(const Discretization& disc, std::span<const double> j, double b3) {
  return reference_velocity_rhs(disc, [&](int, const ElementBasis& e, double x, double y) -> Vec2 {
    const Vec2 jv = eval_current(e, j, x, y);
    return {b3 * jv[1], -b3 * jv[0]};
  });
}

std::vector<double> reference_cross_rhs(const Discretization& disc, std::span<const double> u, double b3) {
  std::vector<double> out(disc.layout().n_current, 0.0);
  for (int t = 0; t < disc.num_triangles(); ++t) {
    const ElementBasis e = element_basis(disc.mesh(), t);
    for_each_rhs_point(e, [&](double x, double y, double w) {
      const DenseVelocity v = eval_velocity(disc, e, t, u, x, y);
      const Vec2 f{b3 * v.value[1], -b3 * v.value[0]};
      for (int k = 0; k < 3; ++k) {
        const Vec2 p = e.psi(k, x, y);
        out[e.edge[k]] += w * (f[0] * p[0] + f[1] * p[1]);
      }
    });
  }
  return out;
}

std::vector<double> reference_saddle_solve(const SaddleSystem& system, std::span<const double> primal_rhs,
                                           std::span<const double> dual_rhs, std::span<const double> fixed_values) {
  const int np = system.primal_size();
  const int nd = system.dual_size();
  const bool mean = system.has_mean_constraint();
  const int n = np + nd + (mean ? 1 : 0);
  if (static_cast<int>(primal_rhs.size()) != np || static_cast<int>(dual_rhs.size()) != nd ||
      fixed_values.size() != system.fixed_dofs.size()) {
    throw std::invalid_argument("reference_saddle_solve: size mismatch");
  }
  const DenseMatrix a = to_dense(system.a_block);
  const DenseMatrix b = to_dense(system.b_block);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < np; ++i) {
    rhs(i) = primal_rhs[i];
    for (int j = 0; j < np; ++j) k(i, j) = a(i, j);
  }
  for (int r = 0; r < nd; ++r) {
    rhs(np + r) = dual_rhs[r];
    for (int j = 0; j < np; ++j) {
      k(np + r, j) = b(r, j);
      k(j, np + r) = b(r, j);
    }
    if (mean) {
      k(np + r, n - 1) = system.mean_row[r];
      k(n - 1, np + r) = system.mean_row[r];
    }
  }
  // Known values: move their columns to the right-hand side, then make the
  // rows and columns trivial.
  Eigen::VectorXd known = Eigen::VectorXd::Zero(n);
  for (std::size_t f = 0; f < system.fixed_dofs.size(); ++f) known(system.fixed_dofs[f]) = fixed_values[f];
  rhs -= k * known;
  for (std::size_t f = 0; f < system.fixed_dofs.size(); ++f) {
    const int d = system.fixed_dofs[f];
    k.row(d).setZero();
    k.col(d).setZero();
    k(d, d) = 1.0;
    rhs(d) = fixed_values[f];
  }
  const Eigen::VectorXd x = k.partialPivLu().solve(rhs);
  return std::vector<double>(x.data(), x.data() + np + nd);
}

double min_eigenvalue_symmetric(const DenseMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(as_eigen(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

int numerical_rank(const DenseMatrix& a) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(as_eigen(a));
  return static_cast<int>(qr.rank());
}

double CoupledResidual::max() const {
  return std::max({momentum, continuity, current, charge, scalar, boundary});
}

CoupledResidual coupled_residual(const Discretization& disc, const ProblemDefinition& problem,
                                 const SchemeConfig& config, const SavState& prev, const SavState& next) {
  const bool bdf2 = config.order == 2 && prev.has_previous();
  const double tau = config.tau;
  const double T = config.t_final;
  const double kappa = config.kappa;
  const double nu = 1.0 / config.re;
  const double t1 = next.t;
  const ScalarField b3 = problem.b3 ? problem.b3 : ScalarField([](double, double, double) { return 1.0; });
  const DofLayout& layout = disc.layout();

  const SparseMatrix m = assemble_velocity_mass(disc);
  const SparseMatrix k = assemble_velocity_stiffness(disc);
  const SparseMatrix b = assemble_velocity_pressure_div(disc);
  const SparseMatrix mj = assemble_rt0_mass(disc);
  const SparseMatrix d = assemble_rt0_div(disc);

  // Time derivative, extrapolated fields and the scalar history.
  std::vector<double> du(layout.n_velocity);
  FieldVector u_ext{Space::Velocity, prev.u.coeffs};
  FieldVector j_ext{Space::Current, prev.j.coeffs};
  double dq = 0.0;
  if (bdf2) {
    for (int i = 0; i < layout.n_velocity; ++i) {
      du[i] = (3.0 * next.u.coeffs[i] - 4.0 * prev.u.coeffs[i] + prev.prev_u.coeffs[i]) / (2.0 * tau);
      u_ext.coeffs[i] = 2.0 * prev.u.coeffs[i] - prev.prev_u.coeffs[i];
    }
    for (int i = 0; i < layout.n_current; ++i) j_ext.coeffs[i] = 2.0 * prev.j.coeffs[i] - prev.prev_j.coeffs[i];
    dq = (3.0 * next.q - 4.0 * prev.q + prev.prev_q) / (2.0 * tau);
  } else {
    for (int i = 0; i < layout.n_velocity; ++i) du[i] = (next.u.coeffs[i] - prev.u.coeffs[i]) / tau;
    dq = (next.q - prev.q) / tau;
  }
  const double grow = std::exp(t1 / T);
  const double s = grow * next.q;

  const std::vector<double> conv = assemble_convection_rhs(disc, u_ext);
  const std::vector<double> lor = assemble_lorentz_rhs(disc, j_ext, b3, t1);
  const std::vector<double> cross = assemble_cross_rhs(disc, u_ext, b3, t1);
  const std::vector<double> fu = problem.forcing_u ? assemble_velocity_load(disc, problem.forcing_u, t1)
                                                   : std::vector<double>(layout.n_velocity, 0.0);
  const std::vector<double> fj = problem.forcing_j ? assemble_current_load(disc, problem.forcing_j, t1)
                                                   : std::vector<double>(layout.n_current, 0.0);

  CoupledResidual res;

  // Momentum on free velocity dofs.
  {
    const std::vector<double> mdu = m * du;
    const std::vector<double> ku = k * next.u.coeffs;
    const std::vector<double> btp = b.multiply_transpose(next.p.coeffs);
    std::vector<bool> fixed(layout.n_velocity, false);
    for (int dof : layout.boundary_velocity_dofs) fixed[dof] = true;
    double r = 0.0, scale = 1.0;
    for (int i = 0; i < layout.n_velocity; ++i) {
      if (fixed[i]) continue;
      const double terms[] = {mdu[i], nu * ku[i], btp[i], s * conv[i], s * kappa * lor[i], fu[i]};
      for (double v : terms) scale = std::max(scale, std::abs(v));
      r = std::max(r, std::abs(mdu[i] + nu * ku[i] - btp[i] + s * (conv[i] - kappa * lor[i]) - fu[i]));
    }
    res.momentum = r / scale;
  }
  {
    const std::vector<double> bu = b * next.u.coeffs;
    res.continuity = norm_inf(bu) / std::max(1.0, norm_inf(next.u.coeffs));
  }
  // Ohm's law on free current dofs.
  {
    const std::vector<double> mjj = mj * next.j.coeffs;
    const std::vector<double> dtphi = d.multiply_transpose(next.phi.coeffs);
    std::vector<bool> fixed(layout.n_current, false);
    for (int dof : layout.boundary_current_dofs) fixed[dof] = true;
    double r = 0.0, scale = 1.0;
    for (int i = 0; i < layout.n_current; ++i) {
      if (fixed[i]) continue;
      const double terms[] = {mjj[i], dtphi[i], s * cross[i], fj[i]};
      for (double v : terms) scale = std::max(scale, std::abs(v));
      r = std::max(r, std::abs(mjj[i] - dtphi[i] - s * cross[i] - fj[i]));
    }
    res.current = r / scale;
  }
  {
    const std::vector<double> dj = d * next.j.coeffs;
    res.charge = norm_inf(dj) / std::max(1.0, norm_inf(next.j.coeffs));
  }
  // Scalar equation.
  {
    const double bflux = boundary_kinetic_flux(disc, problem.boundary_velocity, t1);
    const double coupling = dot(conv, next.u.coeffs) - kappa * dot(lor, next.u.coeffs) -
                            kappa * dot(cross, next.j.coeffs) - bflux;
    const double lhs = dq + next.q / T;
    const double rhs = grow * coupling;
    const double scale = std::max({1.0, std::abs(dq), std::abs(next.q / T), std::abs(rhs)});
    res.scalar = std::abs(lhs - rhs) / scale;
  }
  // Boundary data.
  {
    const BoundaryValues ub = velocity_boundary_values(disc, problem.boundary_velocity, t1);
    const BoundaryValues jb = current_boundary_fluxes(disc, problem.boundary_current, t1);
    double r = 0.0;
    for (std::size_t i = 0; i < ub.dofs.size(); ++i) r = std::max(r, std::abs(next.u.coeffs[ub.dofs[i]] - ub.values[i]));
    for (std::size_t i = 0; i < jb.dofs.size(); ++i) r = std::max(r, std::abs(next.j.coeffs[jb.dofs[i]] - jb.values[i]));
    res.boundary = r;
  }
  return res;
}

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = dist(gen);
  return v;
}

Injection parse_injection(const std::string& name) {
  if (name.empty() || name == "none") return Injection::None;
  if (name == "flip-lorentz-sign") return Injection::FlipLorentzSign;
  if (name == "naive-bdf2-coefficient") return Injection::NaiveBdf2Coefficient;
  throw std::invalid_argument("unknown injection '" + name +
                              "' (expected none, flip-lorentz-sign or naive-bdf2-coefficient)");
}

const char* to_string(Injection injection) {
  switch (injection) {
    case Injection::None: return "none";
    case Injection::FlipLorentzSign: return "flip-lorentz-sign";
    case Injection::NaiveBdf2Coefficient: return "naive-bdf2-coefficient";
  }
  return "?";
}

namespace {

const ScalarField kUnitB3 = [](double, double, double) { return 1.0; };

struct Worst {
  double value = 0.0;
  std::string where;
  void update(double v, const std::string& label) {
    if (!(v <= value)) {  // NaN counts as worst
      value = v;
      where = label;
    }
  }
};

SuiteResult finish(const std::string& name, const Worst& w, double tol) {
  SuiteResult r;
  r.name = name;
  r.worst = w.value;
  r.tolerance = tol;
  r.passed = w.value <= tol;
  r.detail = w.where.empty() ? "" : "worst at " + w.where;
  return r;
}

std::vector<double> lorentz(const Discretization& disc, const FieldVector& j, Injection inj) {
  std::vector<double> v = assemble_lorentz_rhs(disc, j, kUnitB3, 0.0);
  if (inj == Injection::FlipLorentzSign) {
    for (double& x : v) x = -x;
  }
  return v;
}

SuiteResult mesh_suite() {
  Worst w;
  for (int n = 1; n <= 3; ++n) {
    const auto violations = validate_mesh(build_unit_square_mesh(n));
    w.update(static_cast<double>(violations.size()),
             "n=" + std::to_string(n) + (violations.empty() ? "" : ": " + violations.front().message));
  }
  return finish("mesh", w, 0.0);
}

SuiteResult assembly_suite(Injection inj) {
  Worst w;
  for (int n = 1; n <= 3; ++n) {
    const Discretization disc(build_unit_square_mesh(n));
    const std::string tag = "n=" + std::to_string(n) + " ";
    w.update(max_abs_difference(to_dense(assemble_velocity_mass(disc)), reference_velocity_mass(disc)), tag + "mass");
    w.update(max_abs_difference(to_dense(assemble_velocity_stiffness(disc)), reference_velocity_stiffness(disc)),
             tag + "stiffness");
    w.update(max_abs_difference(to_dense(assemble_velocity_pressure_div(disc)), reference_velocity_pressure_div(disc)),
             tag + "velocity divergence");
    w.update(max_abs_difference(to_dense(assemble_rt0_mass(disc)), reference_rt0_mass(disc)), tag + "rt0 mass");
    w.update(max_abs_difference(to_dense(assemble_rt0_div(disc)), reference_rt0_div(disc)), tag + "rt0 divergence");
    for (Space s : {Space::Pressure, Space::Potential}) {
      w.update(max_abs_difference(zero_mean_constraint(disc, s), reference_mean_weights(disc, s)),
               tag + to_string(s) + " mean weights");
    }
    const FieldVector u{Space::Velocity, random_vector(disc.layout().n_velocity, 11 + n)};
    const FieldVector j{Space::Current, random_vector(disc.layout().n_current, 23 + n)};
    w.update(max_abs_difference(assemble_convection_rhs(disc, u), reference_convection_rhs(disc, u.coeffs)),
             tag + "convection");
    w.update(max_abs_difference(lorentz(disc, j, inj), reference_lorentz_rhs(disc, j.coeffs, 1.0)), tag + "lorentz");
    w.update(max_abs_difference(assemble_cross_rhs(disc, u, kUnitB3, 0.0), reference_cross_rhs(disc, u.coeffs, 1.0)),
             tag + "cross");
  }
  return finish("assembly", w, 1e-13);
}

SuiteResult spectra_suite() {
  // Smallest eigenvalues must be positive and the RT0 divergence of full row
  // rank. Reported defect: 1 if a check fails, else 0.
  Worst w;
  for (int n = 1; n <= 3; ++n) {
    const Discretization disc(build_unit_square_mesh(n));
    const std::string tag = "n=" + std::to_string(n) + " ";
    const double lm = min_eigenvalue_symmetric(to_dense(assemble_velocity_mass(disc)));
    const double lj = min_eigenvalue_symmetric(to_dense(assemble_rt0_mass(disc)));
    const DenseMatrix d = to_dense(assemble_rt0_div(disc));
    w.update(lm > 0.0 ? 0.0 : 1.0, tag + "velocity mass eigenvalue");
    w.update(lj > 0.0 ? 0.0 : 1.0, tag + "rt0 mass eigenvalue");
    w.update(numerical_rank(d) == d.rows ? 0.0 : 1.0, tag + "rt0 divergence rank");
  }
  return finish("spectra", w, 0.0);
}

SuiteResult solve_suite() {
  Worst w;
  for (int n = 1; n <= 3; ++n) {
    const Discretization disc(build_unit_square_mesh(n));
    const std::string tag = "n=" + std::to_string(n) + " ";
    const SaddleSystem stokes =
        make_stokes_system(disc, assemble_velocity_mass(disc), assemble_velocity_stiffness(disc),
                           assemble_velocity_pressure_div(disc), 10.0, 1.0);
    const SaddleSystem darcy = make_darcy_system(disc, assemble_rt0_mass(disc), assemble_rt0_div(disc));
    int seed = 100 * n;
    for (const auto* sys : {&stokes, &darcy}) {
      const std::string name = tag + (sys == &stokes ? "stokes" : "darcy");
      const auto f = random_vector(sys->primal_size(), ++seed);
      // Dual data is zero: the saddle rows are divergence constraints.
      const std::vector<double> g(sys->dual_size(), 0.0);
      const auto fixed = random_vector(sys->fixed_dofs.size(), ++seed);
      const SaddleSolution sol = SaddleSolver(*sys).solve(f, g, fixed);
      const auto ref = reference_saddle_solve(*sys, f, g, fixed);
      std::vector<double> got = sol.primal;
      got.insert(got.end(), sol.dual.begin(), sol.dual.end());
      w.update(max_abs_difference(got, ref), name);
      if (!(std::abs(dot(sys->mean_row, sol.dual)) <= 1e-10)) {
        w.update(std::numeric_limits<double>::infinity(), name + " dual mean");
      }
    }
  }
  return finish("solve", w, 1e-9);
}

SuiteResult duality_suite(Injection inj) {
  Worst w;
  for (int n = 1; n <= 3; ++n) {
    const Discretization disc(build_unit_square_mesh(n));
    const int pairs = n == 3 ? 100 : 10;
    for (int p = 0; p < pairs; ++p) {
      const FieldVector u{Space::Velocity, random_vector(disc.layout().n_velocity, 1000 * n + 2 * p)};
      const FieldVector j{Space::Current, random_vector(disc.layout().n_current, 1000 * n + 2 * p + 1)};
      const double v =
          dot(j.coeffs, assemble_cross_rhs(disc, u, kUnitB3, 0.0)) + dot(u.coeffs, lorentz(disc, j, inj));
      w.update(std::abs(v), "n=" + std::to_string(n) + " pair " + std::to_string(p));
    }
  }
  return finish("duality", w, 1e-12);
}

struct RunCase {
  std::string label;
  ProblemDefinition problem;
  int order;
  double tau;
};

std::vector<RunCase> identity_cases() {
  return {
      {"stability Re=20 order 1", stability_problem_2d(20.0, 20.0), 1, 0.1},
      {"stability Re=20 order 2", stability_problem_2d(20.0, 20.0), 2, 0.1},
      {"stability Re=100 order 2", stability_problem_2d(100.0, 100.0), 2, 0.5},
      {"accuracy order 1", accuracy_problem_2d(), 1, 0.05},
      {"accuracy order 2", accuracy_problem_2d(), 2, 0.05},
  };
}

struct RunSummary {
  std::string label;
  bool homogeneous = false;
  bool completed = false;
  std::string failure;
  std::vector<StepReport> reports;
};

std::vector<RunSummary> identity_runs(Injection inj) {
  const Discretization disc(build_unit_square_mesh(3));
  std::vector<RunSummary> out;
  for (const RunCase& c : identity_cases()) {
    SchemeConfig cfg = SchemeConfig::for_problem(c.problem, c.order, c.tau);
    if (inj == Injection::NaiveBdf2Coefficient) cfg.split_coefficient = SplitCoefficient::Naive;
    const Trajectory tr = run(disc, c.problem, cfg);
    RunSummary s;
    s.label = c.label;
    s.homogeneous = !c.problem.boundary_velocity && !c.problem.forcing_u && !c.problem.forcing_j;
    s.completed = tr.completed();
    s.failure = tr.failure_message;
    s.reports = tr.reports;
    out.push_back(std::move(s));
  }
  return out;
}

SuiteResult a2_suite(const std::vector<RunSummary>& runs) {
  Worst w;
  for (const RunSummary& r : runs) {
    if (!r.completed) w.update(std::numeric_limits<double>::infinity(), r.label + ": " + r.failure);
    for (const StepReport& rep : r.reports) {
      w.update(rep.a2_identity_defect, r.label + " step " + std::to_string(rep.step));
      if (!(rep.denominator > 0.0)) w.update(std::numeric_limits<double>::infinity(), r.label + " denominator");
    }
  }
  return finish("a2_identity", w, 1e-10);
}

SuiteResult energy_suite(const std::vector<RunSummary>& runs) {
  Worst w;
  for (const RunSummary& r : runs) {
    if (!r.homogeneous) continue;
    for (const StepReport& rep : r.reports) {
      w.update(std::abs(rep.energy_identity_residual), r.label + " step " + std::to_string(rep.step));
    }
  }
  return finish("energy_identity", w, 1e-8);
}

SuiteResult charge_suite(const std::vector<RunSummary>& runs) {
  Worst w;
  for (const RunSummary& r : runs) {
    for (const StepReport& rep : r.reports) w.update(rep.max_div_j, r.label + " step " + std::to_string(rep.step));
  }
  return finish("charge", w, 1e-9);
}

SuiteResult coupled_suite(Injection inj) {
  const Discretization disc(build_unit_square_mesh(3));
  const ProblemDefinition problem = accuracy_problem_2d();
  Worst w;
  for (int order : {1, 2}) {
    SchemeConfig cfg = SchemeConfig::for_problem(problem, order, 0.05);
    if (inj == Injection::NaiveBdf2Coefficient) cfg.split_coefficient = SplitCoefficient::Naive;
    RunOptions opts;
    opts.keep_states = true;
    const Trajectory tr = run(disc, problem, cfg, opts);
    const std::string label = "order " + std::to_string(order);
    if (!tr.completed()) w.update(std::numeric_limits<double>::infinity(), label + ": " + tr.failure_message);
    for (std::size_t k = 1; k < tr.states.size(); ++k) {
      const CoupledResidual r = coupled_residual(disc, problem, cfg, tr.states[k - 1], tr.states[k]);
      w.update(r.max(), label + " step " + std::to_string(k));
    }
  }
  return finish("coupled_residual", w, 1e-8);
}

}  // namespace

std::vector<SuiteResult> run_selftest(Injection injection) {
  std::vector<SuiteResult> out;
  out.push_back(mesh_suite());
  out.push_back(assembly_suite(injection));
  out.push_back(spectra_suite());
  out.push_back(solve_suite());
  out.push_back(duality_suite(injection));
  const auto runs = identity_runs(injection);
  out.push_back(a2_suite(runs));
  out.push_back(energy_suite(runs));
  out.push_back(charge_suite(runs));
  out.push_back(coupled_suite(injection));
  return out;
}

}  // namespace savmhd::verify
