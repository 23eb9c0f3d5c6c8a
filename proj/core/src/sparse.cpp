#include "rve/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace rve {

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (Index i = 0; i < rows; ++i) {
    double s = 0.0;
    for (Index p = row_ptr[i]; p < row_ptr[i + 1]; ++p) s += val[p] * x[col[p]];
    y[i] = s;
  }
}

std::vector<double> CsrMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(static_cast<std::size_t>(rows));
  multiply(x, y);
  return y;
}

double CsrMatrix::coeff(Index i, Index j) const {
  const auto first = col.begin() + row_ptr[i];
  const auto last = col.begin() + row_ptr[i + 1];
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return val[static_cast<std::size_t>(it - col.begin())];
}

double CsrMatrix::max_abs() const {
  double m = 0.0;
  for (double v : val) m = std::max(m, std::abs(v));
  return m;
}

double CsrMatrix::max_asymmetry() const {
  double m = 0.0;
  for (Index i = 0; i < rows; ++i) {
    for (Index p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
      m = std::max(m, std::abs(val[p] - coeff(col[p], i)));
    }
  }
  return m;
}

Eigen::Map<const Eigen::SparseMatrix<double, Eigen::ColMajor, CsrMatrix::Index>>
CsrMatrix::transposed_view() const {
  return {cols, rows, static_cast<Index>(val.size()), row_ptr.data(), col.data(), val.data()};
}

Eigen::MatrixXd CsrMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index p = row_ptr[i]; p < row_ptr[i + 1]; ++p) d(i, col[p]) += val[p];
  }
  return d;
}

CsrMatrix make_pattern(CsrMatrix::Index rows, CsrMatrix::Index cols,
                       const std::vector<std::vector<CsrMatrix::Index>>& row_columns) {
  CsrMatrix a;
  a.rows = rows;
  a.cols = cols;
  a.row_ptr.assign(static_cast<std::size_t>(rows) + 1, 0);
  std::size_t nnz = 0;
  for (CsrMatrix::Index i = 0; i < rows; ++i) {
    nnz += row_columns[i].size();
    a.row_ptr[i + 1] = static_cast<CsrMatrix::Index>(nnz);
  }
  a.col.reserve(nnz);
  for (const auto& cols_i : row_columns) a.col.insert(a.col.end(), cols_i.begin(), cols_i.end());
  a.val.assign(nnz, 0.0);
  return a;
}

void add_to_entry(CsrMatrix& a, CsrMatrix::Index i, CsrMatrix::Index j, double value) {
  const auto first = a.col.begin() + a.row_ptr[i];
  const auto last = a.col.begin() + a.row_ptr[i + 1];
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) throw std::logic_error("add_to_entry: entry outside sparsity pattern");
  a.val[static_cast<std::size_t>(it - a.col.begin())] += value;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace rve
