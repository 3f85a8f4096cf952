#include "savmhd/linsolve.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "savmhd/errors.hpp"

namespace savmhd {

namespace {

std::vector<Triplet> saddle_triplets(const SaddleSystem& s, const std::vector<bool>* fixed) {
  const int n = s.primal_size();
  const int m = s.dual_size();
  std::vector<Triplet> t;
  t.reserve(s.a_block.nnz() + 2 * s.b_block.nnz() + 2 * s.mean_row.size() + s.fixed_dofs.size());
  auto is_fixed = [fixed](int i) { return fixed != nullptr && (*fixed)[i]; };

  const auto a_off = s.a_block.row_offsets();
  const auto a_idx = s.a_block.col_indices();
  const auto a_val = s.a_block.values();
  for (int r = 0; r < n; ++r) {
    if (is_fixed(r)) {
      t.push_back({r, r, 1.0});
      continue;
    }
    for (int k = a_off[r]; k < a_off[r + 1]; ++k) {
      if (!is_fixed(a_idx[k])) t.push_back({r, a_idx[k], a_val[k]});
    }
  }
  const auto b_off = s.b_block.row_offsets();
  const auto b_idx = s.b_block.col_indices();
  const auto b_val = s.b_block.values();
  for (int r = 0; r < m; ++r) {
    for (int k = b_off[r]; k < b_off[r + 1]; ++k) {
      if (is_fixed(b_idx[k])) continue;
      t.push_back({n + r, b_idx[k], b_val[k]});
      t.push_back({b_idx[k], n + r, b_val[k]});
    }
  }
  if (s.has_mean_constraint()) {
    for (int r = 0; r < m; ++r) {
      t.push_back({n + r, n + m, s.mean_row[r]});
      t.push_back({n + m, n + r, s.mean_row[r]});
    }
  }
  return t;
}

void check_shapes(const SaddleSystem& s) {
  if (s.a_block.rows() != s.a_block.cols()) throw std::invalid_argument("SaddleSystem: A block not square");
  if (s.b_block.cols() != s.a_block.rows()) throw std::invalid_argument("SaddleSystem: B block width mismatch");
  if (s.has_mean_constraint() && static_cast<int>(s.mean_row.size()) != s.dual_size()) {
    throw std::invalid_argument("SaddleSystem: mean row length mismatch");
  }
  if (!std::is_sorted(s.fixed_dofs.begin(), s.fixed_dofs.end()) ||
      std::adjacent_find(s.fixed_dofs.begin(), s.fixed_dofs.end()) != s.fixed_dofs.end()) {
    throw std::invalid_argument("SaddleSystem: fixed dofs must be sorted and unique");
  }
  for (int d : s.fixed_dofs) {
    if (d < 0 || d >= s.primal_size()) throw std::invalid_argument("SaddleSystem: fixed dof out of range");
  }
}

}  // namespace

SparseMatrix SaddleSystem::assemble_operator() const {
  check_shapes(*this);
  const auto t = saddle_triplets(*this, nullptr);
  return SparseMatrix::from_triplets(size(), size(), t);
}

SparseMatrix SaddleSystem::assemble_constrained_operator() const {
  check_shapes(*this);
  std::vector<bool> fixed(primal_size(), false);
  for (int d : fixed_dofs) fixed[d] = true;
  const auto t = saddle_triplets(*this, &fixed);
  return SparseMatrix::from_triplets(size(), size(), t);
}

namespace {

using LuSolver = Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>;

Eigen::SparseMatrix<double> to_eigen(const SparseMatrix& k, int n, int pin) {
  std::vector<Eigen::Triplet<double>> et;
  et.reserve(k.nnz() + 1);
  const auto off = k.row_offsets();
  const auto idx = k.col_indices();
  const auto val = k.values();
  for (int r = 0; r < n; ++r) {
    for (int p = off[r]; p < off[r + 1]; ++p) {
      if (idx[p] < n) et.emplace_back(r, idx[p], val[p]);
    }
  }
  if (pin >= 0) et.emplace_back(pin, pin, 1.0);
  Eigen::SparseMatrix<double> mat(n, n);
  mat.setFromTriplets(et.begin(), et.end());
  mat.makeCompressed();
  return mat;
}

}  // namespace

// A dense mean-constraint border wrecks the fill of any sparse LU, so when the
// bordered block K0 has the constant-dual null vector z = (0, 1) the border is
// eliminated instead: with c the border column,
//   lambda = z.b / z.c,  K0 x = b - c lambda  (now consistent),
// and K0 x = r is solved through K1 = K0 + e_k e_k^T (k a dual dof), which is
// nonsingular and returns the solution with x_k = 0; the multiple of z fixing
// c.x is added afterwards. Without that null vector the whole bordered matrix
// is factorized.
struct SaddleSolver::Impl {
  SaddleSystem system;
  SparseMatrix unconstrained;
  SparseMatrix constrained;
  LuSolver lu;
  bool eliminate_border = false;

  std::vector<double> apply_lu(std::span<const double> rhs) const {
    Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
    Eigen::VectorXd x = lu.solve(b);
    return std::vector<double>(x.data(), x.data() + x.size());
  }

  /// One application of the (approximate) inverse of the constrained operator.
  std::vector<double> apply_inverse(std::span<const double> rhs) const {
    if (!eliminate_border) return apply_lu(rhs);
    const int n = system.primal_size();
    const int m = system.dual_size();
    const std::span<const double> w = system.mean_row;
    double zb = 0.0, zc = 0.0;
    for (int r = 0; r < m; ++r) {
      zb += rhs[n + r];
      zc += w[r];
    }
    const double lambda = zb / zc;
    std::vector<double> b(rhs.begin(), rhs.begin() + n + m);
    for (int r = 0; r < m; ++r) b[n + r] -= w[r] * lambda;
    std::vector<double> x = apply_lu(b);
    double cx = 0.0;
    for (int r = 0; r < m; ++r) cx += w[r] * x[n + r];
    const double alpha = (rhs[n + m] - cx) / zc;
    for (int r = 0; r < m; ++r) x[n + r] += alpha;
    x.push_back(lambda);
    return x;
  }
};

namespace {

bool has_constant_dual_null_vector(const SaddleSystem& s, const SparseMatrix& constrained) {
  if (!s.has_mean_constraint() || s.dual_size() == 0) return false;
  const int n = s.primal_size();
  const int m = s.dual_size();
  std::vector<double> z(constrained.cols(), 0.0);
  for (int r = 0; r < m; ++r) z[n + r] = 1.0;
  std::vector<double> kz = constrained * z;
  kz.pop_back();  // border row
  double sum_w = 0.0;
  for (double v : s.mean_row) sum_w += v;
  return norm_inf(kz) <= 1e-12 * constrained.max_abs_row_sum() && std::abs(sum_w) > 0.0;
}

}  // namespace

SaddleSolver::SaddleSolver(const SaddleSystem& system) {
  auto impl = std::make_shared<Impl>();
  impl->system = system;
  impl->unconstrained = system.assemble_operator();
  impl->constrained = system.assemble_constrained_operator();

  const SparseMatrix& k = impl->constrained;
  impl->eliminate_border = has_constant_dual_null_vector(system, k);
  const int inner = impl->eliminate_border ? k.rows() - 1 : k.rows();
  const int pin = impl->eliminate_border ? system.primal_size() + system.dual_size() - 1 : -1;
  const Eigen::SparseMatrix<double> mat = to_eigen(k, inner, pin);

  impl->lu.analyzePattern(mat);
  impl->lu.factorize(mat);
  if (impl->lu.info() != Eigen::Success) {
    throw SingularSystemError("saddle operator of size " + std::to_string(k.rows()) +
                              " could not be factorized: " + impl->lu.lastErrorMessage());
  }

  // A zero pivot perturbed by rounding survives factorization; probe the
  // inverse with a fixed vector and flag anything beyond double precision.
  std::vector<double> probe(inner);
  for (int i = 0; i < inner; ++i) probe[i] = std::sin(1.0 + i);
  const std::vector<double> x = impl->apply_lu(probe);
  const double growth = norm_inf(x) * k.max_abs_row_sum() / norm_inf(probe);
  if (!std::isfinite(growth) || growth > 1e13) {
    std::ostringstream msg;
    msg << "saddle operator of size " << k.rows() << " is numerically singular (condition estimate " << growth
        << ")";
    throw SingularSystemError(msg.str());
  }
  impl_ = std::move(impl);
}

int SaddleSolver::size() const { return impl_->constrained.rows(); }
const SaddleSystem& SaddleSolver::system() const { return impl_->system; }
const SparseMatrix& SaddleSolver::constrained_operator() const { return impl_->constrained; }

std::vector<double> SaddleSolver::solve(std::span<const double> rhs, Accuracy accuracy) const {
  if (static_cast<int>(rhs.size()) != size()) {
    throw std::invalid_argument("SaddleSolver::solve: rhs length " + std::to_string(rhs.size()) + ", expected " +
                                std::to_string(size()));
  }
  const double rhs_norm = norm2(rhs);
  std::vector<double> x(rhs.size(), 0.0);
  if (rhs_norm == 0.0) return x;

  const SparseMatrix& k = impl_->constrained;
  x = impl_->apply_inverse(rhs);
  std::vector<double> r(rhs.size());
  auto correct = [&] {
    const std::vector<double> dx = impl_->apply_inverse(r);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += dx[i];
  };
  if (accuracy == Accuracy::Extended) {
    // One pass against an accurately computed residual is enough to make
    // every component accurate to working precision.
    r = residual_compensated(k, x, rhs);
    correct();
  } else {
    for (int pass = 0; pass < 3; ++pass) {
      k.multiply(x, r);
      for (std::size_t i = 0; i < r.size(); ++i) r[i] = rhs[i] - r[i];
      if (norm2(r) <= 1e-14 * rhs_norm) break;
      correct();
    }
  }
  k.multiply(x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = rhs[i] - r[i];
  const double rel = norm2(r) / rhs_norm;
  if (!(rel <= kResidualTolerance)) {
    std::ostringstream msg;
    msg << "saddle solve stalled at relative residual " << rel;
    throw SolverError(msg.str(), rel);
  }
  return x;
}

SaddleSolution SaddleSolver::solve(std::span<const double> primal_rhs, std::span<const double> dual_rhs,
                                   std::span<const double> fixed_values, Accuracy accuracy) const {
  const SaddleSystem& s = impl_->system;
  const int n = s.primal_size();
  const int m = s.dual_size();
  if (static_cast<int>(primal_rhs.size()) != n || static_cast<int>(dual_rhs.size()) != m ||
      fixed_values.size() != s.fixed_dofs.size()) {
    throw std::invalid_argument("SaddleSolver::solve: block sizes do not match the system");
  }
  std::vector<double> lift(size(), 0.0);
  for (std::size_t k = 0; k < s.fixed_dofs.size(); ++k) lift[s.fixed_dofs[k]] = fixed_values[k];

  std::vector<double> rhs(size(), 0.0);
  std::copy(primal_rhs.begin(), primal_rhs.end(), rhs.begin());
  std::copy(dual_rhs.begin(), dual_rhs.end(), rhs.begin() + n);
  const std::vector<double> k_lift = impl_->unconstrained * lift;
  for (int i = 0; i < size(); ++i) rhs[i] -= k_lift[i];
  for (std::size_t k = 0; k < s.fixed_dofs.size(); ++k) rhs[s.fixed_dofs[k]] = fixed_values[k];

  const std::vector<double> x = solve(rhs, accuracy);

  SaddleSolution out;
  out.primal.assign(x.begin(), x.begin() + n);
  out.dual.assign(x.begin() + n, x.begin() + n + m);
  out.multiplier = s.has_mean_constraint() ? x[n + m] : 0.0;
  std::vector<double> r = impl_->constrained * x;
  for (int i = 0; i < size(); ++i) r[i] -= rhs[i];
  const double scale = norm2(rhs);
  out.relative_residual = scale > 0.0 ? norm2(r) / scale : norm2(r);
  return out;
}

}  // namespace savmhd
