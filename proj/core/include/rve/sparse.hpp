#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

namespace rve {

/// Compressed sparse row matrix with sorted column indices in each row.
///
/// Products traverse rows and columns in storage order, so results are
/// bit-reproducible for identical inputs.
struct CsrMatrix {
  using Index = std::int32_t;

  Index rows = 0;
  Index cols = 0;
  std::vector<Index> row_ptr{0};
  std::vector<Index> col;
  std::vector<double> val;

  std::size_t nonzeros() const noexcept { return val.size(); }

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> multiply(std::span<const double> x) const;

  /// Entry (i, j), zero when not stored.
  double coeff(Index i, Index j) const;
  double max_abs() const;
  /// max |A_ij - A_ji| over stored entries.
  double max_asymmetry() const;

  /// Zero-copy view usable by Eigen. Because the view reinterprets rows as
  /// columns it equals A^T, which is A for the symmetric matrices used here.
  Eigen::Map<const Eigen::SparseMatrix<double, Eigen::ColMajor, Index>> transposed_view() const;

  Eigen::MatrixXd to_dense() const;
};

/// Builds a CSR matrix from a per-row sorted, duplicate-free column pattern
/// with all values zero.
CsrMatrix make_pattern(CsrMatrix::Index rows, CsrMatrix::Index cols,
                       const std::vector<std::vector<CsrMatrix::Index>>& row_columns);

/// Adds `value` to an entry that must already exist in the pattern.
void add_to_entry(CsrMatrix& a, CsrMatrix::Index i, CsrMatrix::Index j, double value);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace rve
