#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace savmhd {

struct Triplet {
  int row;
  int col;
  double value;
};

/// Compressed-row real matrix. Column indices are sorted and unique within a
/// row; explicit zeros are kept.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int rows, int cols, std::vector<int> offsets, std::vector<int> indices, std::vector<double> values);

  /// Duplicates are summed in input order, so the result is deterministic.
  static SparseMatrix from_triplets(int rows, int cols, std::span<const Triplet> triplets);
  static SparseMatrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const int> row_offsets() const { return offsets_; }
  std::span<const int> col_indices() const { return indices_; }
  std::span<const double> values() const { return values_; }

  /// Zero if (row, col) is not stored.
  double coeff(int row, int col) const;

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> operator*(std::span<const double> x) const;
  /// y = A^T x
  std::vector<double> multiply_transpose(std::span<const double> x) const;

  SparseMatrix transpose() const;
  SparseMatrix scaled(double factor) const;

  /// Max |A_ij - A_ji|.
  double symmetry_defect() const;
  /// Row-major dense copy; meant for small matrices in checks.
  std::vector<double> to_dense() const;
  double max_abs_row_sum() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> offsets_{0};
  std::vector<int> indices_;
  std::vector<double> values_;
};

/// alpha * A + beta * B (same shape).
SparseMatrix add(double alpha, const SparseMatrix& a, double beta, const SparseMatrix& b);

double dot(std::span<const double> a, std::span<const double> b);
double norm_inf(std::span<const double> a);
double norm2(std::span<const double> a);
/// x^T A x
double quadratic_form(const SparseMatrix& a, std::span<const double> x);

/// Dot product evaluated as if in twice the working precision (compensated
/// products and sums), then rounded once.
double dot_compensated(std::span<const double> a, std::span<const double> b);
/// b - A x with every row in compensated arithmetic.
std::vector<double> residual_compensated(const SparseMatrix& a, std::span<const double> x,
                                         std::span<const double> b);
/// x^T A x with compensated row products and outer sum.
double quadratic_form_compensated(const SparseMatrix& a, std::span<const double> x);

}  // namespace savmhd
