#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rve {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: RVE description, material data or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Mesh defects: unmatched periodic images, degenerate elements.
class MeshError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or incomplete multi-point constraints.
class ConstraintError : public Error {
 public:
  using Error::Error;
};

/// Singular or indefinite matrix where an SPD one was required.
class MatrixError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver ran out of iterations.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> residual_tail)
      : Error(what), residual_tail_(std::move(residual_tail)) {}

  /// Last few relative residuals, oldest first.
  const std::vector<double>& residual_tail() const noexcept { return residual_tail_; }

 private:
  std::vector<double> residual_tail_;
};

/// Post-processing inconsistency (e.g. negative energy-derived modulus).
class HomogenizationError : public Error {
 public:
  using Error::Error;
};

}  // namespace rve
