#pragma once

#include <string>

#include "rve/config.hpp"
#include "rve/errors.hpp"
#include "rve/homog.hpp"

namespace rve {

/// Output file could not be written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Voigt labels in output order: 11 22 33 12 13 23 (3D) or 11 22 12 (2D).
std::vector<std::string> voigt_labels(int dim);

/// JSON document; see README for the schema. Keys appear in a fixed order and
/// numbers are written with round-trip precision.
std::string format_json(const HomogenizationResult& result, const SolverOptions& solver);

/// `key,value` rows: constants, C entries (C11..), S entries (S11..), diagnostics.
std::string format_csv(const HomogenizationResult& result);

std::string emit_results(const HomogenizationResult& result, OutputFormat format,
                         const SolverOptions& solver);

/// Writes `text` to `path`, or to standard output for "-".
void write_text(const std::string& text, const std::string& path);

}  // namespace rve
