#include "savmhd/sparse.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

namespace savmhd {

SparseMatrix::SparseMatrix(int rows, int cols, std::vector<int> offsets, std::vector<int> indices,
                           std::vector<double> values)
    : rows_(rows), cols_(cols), offsets_(std::move(offsets)), indices_(std::move(indices)), values_(std::move(values)) {
  if (offsets_.size() != static_cast<std::size_t>(rows_) + 1 || indices_.size() != values_.size() ||
      offsets_.back() != static_cast<int>(indices_.size())) {
    throw std::invalid_argument("SparseMatrix: inconsistent CSR arrays");
  }
  for (int r = 0; r < rows_; ++r) {
    if (offsets_[r] > offsets_[r + 1]) throw std::invalid_argument("SparseMatrix: offsets not monotone");
    for (int k = offsets_[r]; k < offsets_[r + 1]; ++k) {
      if (indices_[k] < 0 || indices_[k] >= cols_ || (k > offsets_[r] && indices_[k] <= indices_[k - 1])) {
        throw std::invalid_argument("SparseMatrix: column indices unsorted or out of range in row " +
                                    std::to_string(r));
      }
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, std::span<const Triplet> triplets) {
  std::vector<int> count(static_cast<std::size_t>(rows) + 1, 0);
  for (const Triplet& t : triplets) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      throw std::out_of_range("SparseMatrix::from_triplets: entry (" + std::to_string(t.row) + ", " +
                              std::to_string(t.col) + ") outside " + std::to_string(rows) + "x" +
                              std::to_string(cols));
    }
    ++count[t.row + 1];
  }
  std::partial_sum(count.begin(), count.end(), count.begin());

  // Bucket by row keeping input order, then stable-sort each row by column.
  std::vector<int> order(triplets.size());
  {
    std::vector<int> cursor(count.begin(), count.end() - 1);
    for (std::size_t k = 0; k < triplets.size(); ++k) order[cursor[triplets[k].row]++] = static_cast<int>(k);
  }

  std::vector<int> offsets(static_cast<std::size_t>(rows) + 1, 0);
  std::vector<int> indices;
  std::vector<double> values;
  indices.reserve(triplets.size());
  values.reserve(triplets.size());
  for (int r = 0; r < rows; ++r) {
    auto first = order.begin() + count[r];
    auto last = order.begin() + count[r + 1];
    std::stable_sort(first, last, [&](int a, int b) { return triplets[a].col < triplets[b].col; });
    for (auto it = first; it != last; ++it) {
      const Triplet& t = triplets[*it];
      if (static_cast<int>(indices.size()) > offsets[r] && indices.back() == t.col) {
        values.back() += t.value;
      } else {
        indices.push_back(t.col);
        values.push_back(t.value);
      }
    }
    offsets[r + 1] = static_cast<int>(indices.size());
  }
  return SparseMatrix(rows, cols, std::move(offsets), std::move(indices), std::move(values));
}

SparseMatrix SparseMatrix::identity(int n) {
  std::vector<int> offsets(static_cast<std::size_t>(n) + 1);
  std::iota(offsets.begin(), offsets.end(), 0);
  std::vector<int> indices(n);
  std::iota(indices.begin(), indices.end(), 0);
  return SparseMatrix(n, n, std::move(offsets), std::move(indices), std::vector<double>(n, 1.0));
}

double SparseMatrix::coeff(int row, int col) const {
  auto first = indices_.begin() + offsets_[row];
  auto last = indices_.begin() + offsets_[row + 1];
  auto it = std::lower_bound(first, last, col);
  if (it == last || *it != col) return 0.0;
  return values_[it - indices_.begin()];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  assert(static_cast<int>(x.size()) == cols_ && static_cast<int>(y.size()) == rows_);
  for (int r = 0; r < rows_; ++r) {
    double sum = 0.0;
    for (int k = offsets_[r]; k < offsets_[r + 1]; ++k) sum += values_[k] * x[indices_[k]];
    y[r] = sum;
  }
}

std::vector<double> SparseMatrix::operator*(std::span<const double> x) const {
  std::vector<double> y(rows_);
  multiply(x, y);
  return y;
}

std::vector<double> SparseMatrix::multiply_transpose(std::span<const double> x) const {
  assert(static_cast<int>(x.size()) == rows_);
  std::vector<double> y(cols_, 0.0);
  for (int r = 0; r < rows_; ++r) {
    for (int k = offsets_[r]; k < offsets_[r + 1]; ++k) y[indices_[k]] += values_[k] * x[r];
  }
  return y;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (int r = 0; r < rows_; ++r) {
    for (int k = offsets_[r]; k < offsets_[r + 1]; ++k) t.push_back({indices_[k], r, values_[k]});
  }
  return from_triplets(cols_, rows_, t);
}

SparseMatrix SparseMatrix::scaled(double factor) const {
  SparseMatrix out = *this;
  for (double& v : out.values_) v *= factor;
  return out;
}

double SparseMatrix::symmetry_defect() const {
  if (rows_ != cols_) return INFINITY;
  double defect = 0.0;
  for (int r = 0; r < rows_; ++r) {
    for (int k = offsets_[r]; k < offsets_[r + 1]; ++k) {
      defect = std::max(defect, std::abs(values_[k] - coeff(indices_[k], r)));
    }
  }
  return defect;
}

std::vector<double> SparseMatrix::to_dense() const {
  std::vector<double> dense(static_cast<std::size_t>(rows_) * cols_, 0.0);
  for (int r = 0; r < rows_; ++r) {
    for (int k = offsets_[r]; k < offsets_[r + 1]; ++k) {
      dense[static_cast<std::size_t>(r) * cols_ + indices_[k]] = values_[k];
    }
  }
  return dense;
}

double SparseMatrix::max_abs_row_sum() const {
  double best = 0.0;
  for (int r = 0; r < rows_; ++r) {
    double sum = 0.0;
    for (int k = offsets_[r]; k < offsets_[r + 1]; ++k) sum += std::abs(values_[k]);
    best = std::max(best, sum);
  }
  return best;
}

SparseMatrix add(double alpha, const SparseMatrix& a, double beta, const SparseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("add: shape mismatch");
  std::vector<Triplet> t;
  t.reserve(a.nnz() + b.nnz());
  const std::pair<const SparseMatrix*, double> terms[] = {{&a, alpha}, {&b, beta}};
  for (const auto& [m, f] : terms) {
    const auto off = m->row_offsets();
    const auto idx = m->col_indices();
    const auto val = m->values();
    for (int r = 0; r < m->rows(); ++r) {
      for (int k = off[r]; k < off[r + 1]; ++k) t.push_back({r, idx[k], f * val[k]});
    }
  }
  return SparseMatrix::from_triplets(a.rows(), a.cols(), t);
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double quadratic_form(const SparseMatrix& a, std::span<const double> x) {
  const std::vector<double> ax = a * x;
  return dot(x, ax);
}

namespace {

// Error-free transformations: a + b = s + e and a * b = p + e exactly.
inline void two_sum(double a, double b, double& s, double& e) {
  s = a + b;
  const double z = s - a;
  e = (a - (s - z)) + (b - z);
}

inline void split(double a, double& hi, double& lo) {
  const double c = 134217729.0 * a;  // 2^27 + 1
  hi = c - (c - a);
  lo = a - hi;
}

inline void two_product(double a, double b, double& p, double& e) {
  p = a * b;
#ifdef __FP_FAST_FMA
  e = std::fma(a, b, -p);
#else
  double ah, al, bh, bl;
  split(a, ah, al);
  split(b, bh, bl);
  e = al * bl - (((p - ah * bh) - al * bh) - ah * bl);
#endif
}

/// Running double-double accumulator.
struct Accumulator {
  double hi = 0.0;
  double lo = 0.0;
  void add_product(double a, double b) {
    double p, ep, s, es;
    two_product(a, b, p, ep);
    two_sum(hi, p, s, es);
    hi = s;
    lo += es + ep;
  }
  void add(double a) {
    double s, es;
    two_sum(hi, a, s, es);
    hi = s;
    lo += es;
  }
  double value() const { return hi + lo; }
};

}  // namespace

double dot_compensated(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  Accumulator acc;
  for (std::size_t i = 0; i < a.size(); ++i) acc.add_product(a[i], b[i]);
  return acc.value();
}

std::vector<double> residual_compensated(const SparseMatrix& a, std::span<const double> x,
                                         std::span<const double> b) {
  const auto off = a.row_offsets();
  const auto idx = a.col_indices();
  const auto val = a.values();
  std::vector<double> r(a.rows());
  for (int i = 0; i < a.rows(); ++i) {
    Accumulator acc;
    acc.add(b[i]);
    for (int k = off[i]; k < off[i + 1]; ++k) acc.add_product(-val[k], x[idx[k]]);
    r[i] = acc.value();
  }
  return r;
}

double quadratic_form_compensated(const SparseMatrix& a, std::span<const double> x) {
  const auto off = a.row_offsets();
  const auto idx = a.col_indices();
  const auto val = a.values();
  Accumulator total;
  for (int i = 0; i < a.rows(); ++i) {
    if (x[i] == 0.0) continue;
    for (int k = off[i]; k < off[i + 1]; ++k) {
      double p, e;
      two_product(val[k], x[idx[k]], p, e);
      total.add_product(p, x[i]);
      total.add_product(e, x[i]);
    }
  }
  return total.value();
}

}  // namespace savmhd
