#include "rve/solver.hpp"

#include <chrono>
#include <cmath>
#include <deque>

#include <Eigen/SparseCholesky>
#include <fmt/format.h>

#include "rve/errors.hpp"

namespace rve {

std::string_view to_string(SolverKind kind) { return kind == SolverKind::cg ? "cg" : "direct"; }

struct SpdSolver::Factorization {
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double, Eigen::ColMajor, CsrMatrix::Index>, Eigen::Lower,
                       Eigen::AMDOrdering<CsrMatrix::Index>>
      llt;
};

SpdSolver::SpdSolver(const CsrMatrix& matrix, SolverOptions options)
    : matrix_(&matrix), options_(options) {
  if (matrix.rows != matrix.cols) throw MatrixError("SPD solver needs a square matrix");
  if (!(options_.tolerance > 0.0)) throw ConfigError("solver tolerance must be positive");

  if (options_.kind == SolverKind::direct) {
    factorization_ = std::make_unique<Factorization>();
    if (matrix.rows > 0) {
      // The stored matrix is symmetric, so the row-major buffers read as
      // column-major describe the same matrix.
      const Eigen::SparseMatrix<double, Eigen::ColMajor, CsrMatrix::Index> a = matrix.transposed_view();
      factorization_->llt.compute(a);
      if (factorization_->llt.info() != Eigen::Success) {
        throw MatrixError("Cholesky factorisation failed: matrix is not positive definite");
      }
    }
    return;
  }

  inverse_diagonal_.resize(static_cast<std::size_t>(matrix.rows));
  for (CsrMatrix::Index i = 0; i < matrix.rows; ++i) {
    const double d = matrix.coeff(i, i);
    if (!(d > 0.0)) {
      throw MatrixError(fmt::format("non-positive diagonal entry {} at row {}", d, i));
    }
    inverse_diagonal_[i] = 1.0 / d;
  }
}

SpdSolver::~SpdSolver() = default;
SpdSolver::SpdSolver(SpdSolver&&) noexcept = default;
SpdSolver& SpdSolver::operator=(SpdSolver&&) noexcept = default;

Solution SpdSolver::solve(std::span<const double> rhs) const {
  const auto start = std::chrono::steady_clock::now();
  const auto n = static_cast<std::size_t>(matrix_->rows);
  if (rhs.size() != n) {
    throw MatrixError(fmt::format("right-hand side has {} entries, matrix has {} rows", rhs.size(), n));
  }

  Solution out;
  const double rhs_norm = norm2(rhs);
  if (rhs_norm == 0.0) {
    out.x.assign(n, 0.0);
    out.report.kind = options_.kind;
  } else if (options_.kind == SolverKind::cg) {
    out = solve_cg(rhs);
  } else {
    const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(n));
    const Eigen::VectorXd x = factorization_->llt.solve(b);
    if (factorization_->llt.info() != Eigen::Success) throw MatrixError("Cholesky solve failed");
    out.x.assign(x.data(), x.data() + x.size());
    std::vector<double> r = matrix_->multiply(out.x);
    for (std::size_t i = 0; i < n; ++i) r[i] -= rhs[i];
    out.report.kind = SolverKind::direct;
    out.report.relative_residual = norm2(r) / rhs_norm;
  }
  out.report.size = static_cast<std::int64_t>(n);
  out.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

Solution SpdSolver::solve_cg(std::span<const double> rhs) const {
  const auto n = static_cast<std::size_t>(matrix_->rows);
  const std::int64_t max_iter =
      options_.max_iterations > 0 ? options_.max_iterations : 20 * static_cast<std::int64_t>(n);
  const double rhs_norm = norm2(rhs);
  const double target = options_.tolerance * rhs_norm;

  std::vector<double> x(n, 0.0);
  std::vector<double> r(rhs.begin(), rhs.end());
  std::vector<double> z(n);
  std::vector<double> p(n);
  std::vector<double> q(n);

  for (std::size_t i = 0; i < n; ++i) z[i] = inverse_diagonal_[i] * r[i];
  p = z;
  double rho = dot(r, z);
  double res = rhs_norm;

  std::deque<double> tail;
  std::int64_t it = 0;
  while (true) {
    // Confirm convergence on the true residual, not the recurrence.
    if (res <= target) {
      matrix_->multiply(x, q);
      double true_sq = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        r[i] = rhs[i] - q[i];
        true_sq += r[i] * r[i];
      }
      res = std::sqrt(true_sq);
      if (res <= target) break;
      for (std::size_t i = 0; i < n; ++i) z[i] = inverse_diagonal_[i] * r[i];
      p = z;
      rho = dot(r, z);
    }
    if (it >= max_iter) {
      throw ConvergenceError(
          fmt::format("CG did not converge in {} iterations (relative residual {:.3e}, target {:.3e})",
                      max_iter, res / rhs_norm, options_.tolerance),
          std::vector<double>(tail.begin(), tail.end()));
    }
    matrix_->multiply(p, q);
    const double curvature = dot(p, q);
    if (!(curvature > 0.0)) {
      throw MatrixError(fmt::format(
          "CG found non-positive curvature {:.3e} at iteration {}: matrix is not positive definite",
          curvature, it));
    }
    const double alpha = rho / curvature;
    double res_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
      res_sq += r[i] * r[i];
    }
    res = std::sqrt(res_sq);
    for (std::size_t i = 0; i < n; ++i) z[i] = inverse_diagonal_[i] * r[i];
    const double rho_next = dot(r, z);
    const double beta = rho_next / rho;
    rho = rho_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    ++it;

    tail.push_back(res / rhs_norm);
    if (tail.size() > 10) tail.pop_front();
  }

  Solution out;
  out.x = std::move(x);
  out.report.kind = SolverKind::cg;
  out.report.iterations = it;
  out.report.relative_residual = res / rhs_norm;
  return out;
}

Solution solve_spd(const CsrMatrix& matrix, std::span<const double> rhs, const SolverOptions& options) {
  const SpdSolver solver(matrix, options);
  return solver.solve(rhs);
}

std::vector<double> recover(std::span<const double> reduced, const RecoveryMap& map) {
  if (reduced.size() != static_cast<std::size_t>(map.reduced_size)) {
    throw ConstraintError(fmt::format("reduced vector has {} entries, recovery map expects {}",
                                      reduced.size(), map.reduced_size));
  }
  std::vector<double> u(map.full_size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto c = map.column[i];
    u[i] = (c >= 0 ? reduced[static_cast<std::size_t>(c)] : 0.0) + map.shift[i];
  }
  return u;
}

}  // namespace rve
