#pragma once

#include <memory>
#include <span>
#include <vector>

#include "savmhd/sparse.hpp"

namespace savmhd {

/// Symmetric saddle-point system
///
///     [ A  B^T  0 ] [x]   [f]
///     [ B  0    w ] [y] = [g]
///     [ 0  w^T  0 ] [l]   [0]
///
/// where the last row/column (present when `mean_row` is non-empty) pins the
/// dual variable to zero mean. Rows and columns listed in `fixed_dofs` are
/// eliminated symmetrically: they become identity rows and the known values
/// are moved to the right-hand side at solve time.
struct SaddleSystem {
  SparseMatrix a_block;          // primal x primal, symmetric
  SparseMatrix b_block;          // dual x primal, as it appears in the operator
  std::vector<double> mean_row;  // dual-sized weights, or empty
  std::vector<int> fixed_dofs;   // sorted primal indices

  int primal_size() const { return a_block.rows(); }
  int dual_size() const { return b_block.rows(); }
  bool has_mean_constraint() const { return !mean_row.empty(); }
  int size() const { return primal_size() + dual_size() + (has_mean_constraint() ? 1 : 0); }

  /// Full operator with no Dirichlet elimination.
  SparseMatrix assemble_operator() const;
  /// Operator with fixed rows/columns replaced by identity. Symmetric.
  SparseMatrix assemble_constrained_operator() const;
};

struct SaddleSolution {
  std::vector<double> primal;
  std::vector<double> dual;
  double multiplier = 0.0;
  double relative_residual = 0.0;
};

/// `Standard` refines until the residual is at rounding level. `Extended`
/// adds a refinement pass with the residual in compensated arithmetic, which
/// makes small components (for instance a current that vanishes up to
/// rounding) accurate relative to themselves rather than to the largest one.
enum class Accuracy { Standard, Extended };

/// Prepared solver for one SaddleSystem: the constrained operator is factorized
/// once and reused for every right-hand side. Handles are cheap to copy (the
/// factorization is shared and immutable) and `solve` is const with no hidden
/// state, so concurrent solves against one handle are safe.
class SaddleSolver {
 public:
  /// Throws SingularSystemError when the constrained operator is singular.
  explicit SaddleSolver(const SaddleSystem& system);

  int size() const;
  const SaddleSystem& system() const;
  const SparseMatrix& constrained_operator() const;

  /// Solves the constrained operator against a full-length right-hand side.
  /// Guarantees ||Kx - b|| <= 1e-10 ||b|| (absolute when b = 0), otherwise
  /// throws SolverError carrying the achieved residual.
  std::vector<double> solve(std::span<const double> rhs, Accuracy accuracy = Accuracy::Standard) const;

  /// Lifts `fixed_values` (one per fixed dof, same order) into the right-hand
  /// side, solves, and splits the result.
  SaddleSolution solve(std::span<const double> primal_rhs, std::span<const double> dual_rhs,
                       std::span<const double> fixed_values, Accuracy accuracy = Accuracy::Standard) const;

  static constexpr double kResidualTolerance = 1e-10;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

/// Same as constructing a SaddleSolver; kept as a free function for symmetry
/// with `solve`.
inline SaddleSolver prepare(const SaddleSystem& system) { return SaddleSolver(system); }

}  // namespace savmhd
