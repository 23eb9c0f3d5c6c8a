#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "rve/pbc.hpp"
#include "rve/sparse.hpp"

namespace rve {

enum class SolverKind { cg, direct };

std::string_view to_string(SolverKind kind);

struct SolverOptions {
  SolverKind kind = SolverKind::cg;
  double tolerance = 1e-10;      ///< relative residual ||K u - f|| / ||f||
  std::int64_t max_iterations = 0;  ///< 0 selects 20 * system size
};

struct SolveReport {
  SolverKind kind = SolverKind::cg;
  std::int64_t iterations = 0;  ///< 0 for the direct solver
  double relative_residual = 0.0;
  double wall_seconds = 0.0;
  std::int64_t size = 0;
};

struct Solution {
  std::vector<double> x;
  SolveReport report;
};

/// SPD solver bound to one matrix. The direct variant factorises once in the
/// constructor, so several right-hand sides share the factorisation. `solve`
/// is const and may be called concurrently.
class SpdSolver {
 public:
  SpdSolver(const CsrMatrix& matrix, SolverOptions options);
  ~SpdSolver();
  SpdSolver(SpdSolver&&) noexcept;
  SpdSolver& operator=(SpdSolver&&) noexcept;

  /// Throws ConvergenceError when the iteration budget is exhausted and
  /// MatrixError on non-positive curvature or a failed factorisation.
  Solution solve(std::span<const double> rhs) const;

  const SolverOptions& options() const noexcept { return options_; }

 private:
  struct Factorization;

  Solution solve_cg(std::span<const double> rhs) const;

  const CsrMatrix* matrix_;
  SolverOptions options_;
  std::vector<double> inverse_diagonal_;
  std::unique_ptr<Factorization> factorization_;
};

/// One-shot convenience wrapper around SpdSolver.
Solution solve_spd(const CsrMatrix& matrix, std::span<const double> rhs, const SolverOptions& options);

/// u_full = T u_r + shift.
std::vector<double> recover(std::span<const double> reduced, const RecoveryMap& map);

}  // namespace rve
