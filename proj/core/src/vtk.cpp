#include "rve/vtk.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <fmt/ranges.h>

#include "rve/report.hpp"

namespace rve {

double von_mises(const Eigen::VectorXd& s, int dim) {
  if (dim == 2) return std::sqrt(s(0) * s(0) - s(0) * s(1) + s(1) * s(1) + 3.0 * s(2) * s(2));
  const double d01 = s(0) - s(1);
  const double d12 = s(1) - s(2);
  const double d20 = s(2) - s(0);
  return std::sqrt(0.5 * (d01 * d01 + d12 * d12 + d20 * d20) +
                   3.0 * (s(3) * s(3) + s(4) * s(4) + s(5) * s(5)));
}

void write_vtk(std::ostream& out, const Mesh& mesh, const PhaseMatrices& phases, const CaseResult& result,
               std::string_view title) {
  const int dim = mesh.dim;
  const std::size_t n_nodes = mesh.node_count();
  const std::size_t n_cells = mesh.element_count();
  const int npe = mesh.nodes_per_element;

  fmt::print(out, "# vtk DataFile Version 3.0\n{}\nASCII\nDATASET UNSTRUCTURED_GRID\n", title);
  fmt::print(out, "POINTS {} double\n", n_nodes);
  for (const Point& p : mesh.nodes) fmt::print(out, "{:.17g} {:.17g} {:.17g}\n", p[0], p[1], p[2]);

  fmt::print(out, "CELLS {} {}\n", n_cells, n_cells * static_cast<std::size_t>(npe + 1));
  for (std::size_t e = 0; e < n_cells; ++e) {
    std::string line = fmt::format("{}", npe);
    for (NodeId n : mesh.element(e)) line += fmt::format(" {}", n);
    fmt::print(out, "{}\n", line);
  }
  fmt::print(out, "CELL_TYPES {}\n", n_cells);
  const int cell_type = dim == 3 ? 12 : 9;
  for (std::size_t e = 0; e < n_cells; ++e) fmt::print(out, "{}\n", cell_type);

  std::vector<Eigen::VectorXd> stress(n_cells);
  for (std::size_t e = 0; e < n_cells; ++e) {
    stress[e] = phases[static_cast<int>(mesh.phases[e])].values *
                centroid_strain(gather(mesh, e, result.displacement), element_coordinates(mesh, e));
  }

  fmt::print(out, "CELL_DATA {}\nSCALARS phase int 1\nLOOKUP_TABLE default\n", n_cells);
  for (Phase p : mesh.phases) fmt::print(out, "{}\n", static_cast<int>(p));
  const auto labels = voigt_labels(dim);
  for (std::size_t c = 0; c < labels.size(); ++c) {
    fmt::print(out, "SCALARS stress_{} double 1\nLOOKUP_TABLE default\n", labels[c]);
    for (const auto& s : stress) fmt::print(out, "{:.17g}\n", s(static_cast<Eigen::Index>(c)));
  }
  fmt::print(out, "SCALARS von_mises double 1\nLOOKUP_TABLE default\n");
  for (const auto& s : stress) fmt::print(out, "{:.17g}\n", von_mises(s, dim));

  fmt::print(out, "POINT_DATA {}\nVECTORS displacement double\n", n_nodes);
  for (std::size_t n = 0; n < n_nodes; ++n) {
    const double* u = result.displacement.data() + n * static_cast<std::size_t>(dim);
    fmt::print(out, "{:.17g} {:.17g} {:.17g}\n", u[0], u[1], dim == 3 ? u[2] : 0.0);
  }
}

std::vector<std::filesystem::path> export_fields(const Mesh& mesh, const PhaseMatrices& phases,
                                                 std::span<const CaseResult> cases,
                                                 const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create directory '{}': {}", dir.string(), ec.message()));

  std::vector<std::filesystem::path> written;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto path = dir / fmt::format("case_{:02}.vtk", i + 1);
    std::ofstream out(path);
    if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
    const Eigen::VectorXd e = cases[i].applied.voigt();
    write_vtk(out, mesh, phases, cases[i],
              fmt::format("rve-homog load case {} strain {}", i + 1,
                          fmt::join(std::vector<double>(e.data(), e.data() + e.size()), " ")));
    if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
    written.push_back(path);
  }
  return written;
}

}  // namespace rve
