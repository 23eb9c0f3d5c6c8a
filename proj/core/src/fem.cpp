#include "rve/fem.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "rve/errors.hpp"

namespace rve {

ElasticityMatrix elasticity_matrix(const MaterialPhase& phase, int dim, PlaneAssumption plane) {
  phase.validate("material");
  const double e = phase.young_modulus;
  const double nu = phase.poisson_ratio;
  ElasticityMatrix out;
  out.dim = dim;
  if (dim == 3) {
    const double lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    const double mu = e / (2.0 * (1.0 + nu));
    out.values = Eigen::MatrixXd::Zero(6, 6);
    out.values.topLeftCorner(3, 3).setConstant(lambda);
    for (int i = 0; i < 3; ++i) out.values(i, i) = lambda + 2.0 * mu;
    for (int i = 3; i < 6; ++i) out.values(i, i) = mu;
    return out;
  }
  if (dim != 2) throw ConfigError(fmt::format("dimension must be 2 or 3, got {}", dim));
  out.values = Eigen::MatrixXd::Zero(3, 3);
  if (plane == PlaneAssumption::stress) {
    const double s = e / (1.0 - nu * nu);
    out.values << s, s * nu, 0.0,  //
        s * nu, s, 0.0,            //
        0.0, 0.0, s * (1.0 - nu) / 2.0;
  } else {
    const double s = e / ((1.0 + nu) * (1.0 - 2.0 * nu));
    out.values << s * (1.0 - nu), s * nu, 0.0,  //
        s * nu, s * (1.0 - nu), 0.0,            //
        0.0, 0.0, s * (1.0 - 2.0 * nu) / 2.0;
  }
  return out;
}

PhaseMatrices phase_matrices(const RveSpec& spec) {
  PhaseMatrices m;
  m[static_cast<int>(Phase::matrix)] = elasticity_matrix(spec.matrix, spec.dim, spec.plane);
  m[static_cast<int>(Phase::fiber)] = elasticity_matrix(spec.fiber, spec.dim, spec.plane);
  return m;
}

namespace {

template <int Dim>
struct Element;

template <>
struct Element<3> {
  static constexpr int kNodes = 8;
  static constexpr int kDofs = 24;
  static constexpr int kVoigt = 6;
  static constexpr std::array<std::array<double, 3>, 8> kCorners{{{-1, -1, -1},
                                                                  {1, -1, -1},
                                                                  {1, 1, -1},
                                                                  {-1, 1, -1},
                                                                  {-1, -1, 1},
                                                                  {1, -1, 1},
                                                                  {1, 1, 1},
                                                                  {-1, 1, 1}}};
};

template <>
struct Element<2> {
  static constexpr int kNodes = 4;
  static constexpr int kDofs = 8;
  static constexpr int kVoigt = 3;
  static constexpr std::array<std::array<double, 2>, 4> kCorners{
      {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}};
};

template <int Dim>
using Coords = Eigen::Matrix<double, Element<Dim>::kNodes, Dim>;
template <int Dim>
using BMatrix = Eigen::Matrix<double, Element<Dim>::kVoigt, Element<Dim>::kDofs>;
template <int Dim>
using KMatrix = Eigen::Matrix<double, Element<Dim>::kDofs, Element<Dim>::kDofs>;
template <int Dim>
using DMatrix = Eigen::Matrix<double, Element<Dim>::kVoigt, Element<Dim>::kVoigt>;

// Strain-displacement matrix at natural point xi; returns det J.
template <int Dim>
double strain_displacement(const Coords<Dim>& x, const std::array<double, Dim>& xi, BMatrix<Dim>& b) {
  constexpr int n = Element<Dim>::kNodes;
  Eigen::Matrix<double, Dim, n> dn_dxi;
  for (int a = 0; a < n; ++a) {
    const auto& c = Element<Dim>::kCorners[a];
    for (int d = 0; d < Dim; ++d) {
      double v = c[d];
      for (int o = 0; o < Dim; ++o) {
        if (o != d) v *= 1.0 + c[o] * xi[o];
      }
      dn_dxi(d, a) = v / static_cast<double>(n);
    }
  }
  const Eigen::Matrix<double, Dim, Dim> jac = dn_dxi * x;
  const double det = jac.determinant();
  if (!(det > 0.0)) {
    throw MeshError(fmt::format("element has non-positive Jacobian determinant {}", det));
  }
  const Eigen::Matrix<double, Dim, n> dn_dx = jac.inverse() * dn_dxi;

  b.setZero();
  for (int a = 0; a < n; ++a) {
    if constexpr (Dim == 3) {
      const double dx = dn_dx(0, a);
      const double dy = dn_dx(1, a);
      const double dz = dn_dx(2, a);
      const int c = 3 * a;
      b(0, c) = dx;
      b(1, c + 1) = dy;
      b(2, c + 2) = dz;
      b(3, c) = dy;
      b(3, c + 1) = dx;
      b(4, c) = dz;
      b(4, c + 2) = dx;
      b(5, c + 1) = dz;
      b(5, c + 2) = dy;
    } else {
      const double dx = dn_dx(0, a);
      const double dy = dn_dx(1, a);
      const int c = 2 * a;
      b(0, c) = dx;
      b(1, c + 1) = dy;
      b(2, c) = dy;
      b(2, c + 1) = dx;
    }
  }
  return det;
}

template <int Dim>
std::array<std::array<double, Dim>, (Dim == 3 ? 8 : 4)> gauss_points() {
  const double g = 1.0 / std::sqrt(3.0);
  std::array<std::array<double, Dim>, (Dim == 3 ? 8 : 4)> pts{};
  for (std::size_t q = 0; q < pts.size(); ++q) {
    for (int d = 0; d < Dim; ++d) pts[q][d] = ((q >> d) & 1U) ? g : -g;
  }
  return pts;
}

template <int Dim>
KMatrix<Dim> stiffness_fixed(const Coords<Dim>& x, const DMatrix<Dim>& d) {
  KMatrix<Dim> k = KMatrix<Dim>::Zero();
  BMatrix<Dim> b;
  for (const auto& xi : gauss_points<Dim>()) {
    const double det = strain_displacement<Dim>(x, xi, b);
    k.noalias() += b.transpose() * (d * b) * det;  // unit Gauss weights
  }
  return 0.5 * (k + k.transpose());
}

template <int Dim>
Coords<Dim> fixed_coords(const Eigen::MatrixXd& coords) {
  if (coords.rows() != Element<Dim>::kNodes || coords.cols() != Dim) {
    throw MeshError(fmt::format("expected {}x{} element coordinates, got {}x{}", Element<Dim>::kNodes,
                                Dim, coords.rows(), coords.cols()));
  }
  return coords;
}

int coords_dim(const Eigen::MatrixXd& coords) {
  if (coords.cols() == 3 && coords.rows() == 8) return 3;
  if (coords.cols() == 2 && coords.rows() == 4) return 2;
  throw MeshError(fmt::format("unsupported element with {} nodes in {}D", coords.rows(), coords.cols()));
}

}  // namespace

Eigen::MatrixXd element_coordinates(const Mesh& mesh, std::size_t element) {
  const auto nodes = mesh.element(element);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(nodes.size()), mesh.dim);
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    for (int d = 0; d < mesh.dim; ++d) x(static_cast<Eigen::Index>(a), d) = mesh.nodes[nodes[a]][d];
  }
  return x;
}

Eigen::MatrixXd element_stiffness(const Eigen::MatrixXd& coords, const ElasticityMatrix& d) {
  const int dim = coords_dim(coords);
  if (d.dim != dim) throw ConfigError("elasticity matrix dimension does not match element");
  if (dim == 3) return stiffness_fixed<3>(fixed_coords<3>(coords), d.values);
  return stiffness_fixed<2>(fixed_coords<2>(coords), d.values);
}

double element_volume(const Eigen::MatrixXd& coords) {
  const int dim = coords_dim(coords);
  double v = 0.0;
  if (dim == 3) {
    BMatrix<3> b;
    const auto x = fixed_coords<3>(coords);
    for (const auto& xi : gauss_points<3>()) v += strain_displacement<3>(x, xi, b);
  } else {
    BMatrix<2> b;
    const auto x = fixed_coords<2>(coords);
    for (const auto& xi : gauss_points<2>()) v += strain_displacement<2>(x, xi, b);
  }
  return v;
}

Eigen::VectorXd centroid_strain(const Eigen::VectorXd& element_displacement,
                                const Eigen::MatrixXd& coords) {
  if (coords_dim(coords) == 3) {
    BMatrix<3> b;
    strain_displacement<3>(fixed_coords<3>(coords), {0.0, 0.0, 0.0}, b);
    return b * element_displacement;
  }
  BMatrix<2> b;
  strain_displacement<2>(fixed_coords<2>(coords), {0.0, 0.0}, b);
  return b * element_displacement;
}

ElementResponse element_stress(const Eigen::VectorXd& element_displacement,
                               const Eigen::MatrixXd& coords, const ElasticityMatrix& d) {
  ElementResponse r;
  r.stress = d.values * centroid_strain(element_displacement, coords);
  const Eigen::MatrixXd k = element_stiffness(coords, d);
  r.energy = 0.5 * element_displacement.dot(k * element_displacement);
  return r;
}

Eigen::VectorXd gather(const Mesh& mesh, std::size_t element, std::span<const double> u) {
  const auto nodes = mesh.element(element);
  const int dim = mesh.dim;
  Eigen::VectorXd ue(static_cast<Eigen::Index>(nodes.size()) * dim);
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    for (int c = 0; c < dim; ++c) {
      ue(static_cast<Eigen::Index>(a) * dim + c) = u[static_cast<std::size_t>(nodes[a]) * dim + c];
    }
  }
  return ue;
}

namespace {

template <int Dim>
void scatter_all(const Mesh& mesh, const PhaseMatrices& phases, CsrMatrix& k) {
  const std::array<DMatrix<Dim>, 2> d{phases[0].values, phases[1].values};
  constexpr int n = Element<Dim>::kNodes;
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const auto nodes = mesh.element(e);
    Coords<Dim> x;
    for (int a = 0; a < n; ++a) {
      for (int c = 0; c < Dim; ++c) x(a, c) = mesh.nodes[nodes[a]][c];
    }
    const KMatrix<Dim> ke = stiffness_fixed<Dim>(x, d[static_cast<int>(mesh.phases[e])]);
    for (int a = 0; a < n; ++a) {
      for (int ca = 0; ca < Dim; ++ca) {
        const auto row = static_cast<CsrMatrix::Index>(nodes[a] * Dim + ca);
        for (int b = 0; b < n; ++b) {
          for (int cb = 0; cb < Dim; ++cb) {
            add_to_entry(k, row, static_cast<CsrMatrix::Index>(nodes[b] * Dim + cb),
                         ke(a * Dim + ca, b * Dim + cb));
          }
        }
      }
    }
  }
}

}  // namespace

GlobalSystem assemble(const Mesh& mesh, const PhaseMatrices& phases) {
  const int dim = mesh.dim;
  for (const auto& p : phases) {
    if (p.dim != dim) throw ConfigError("phase elasticity matrix dimension does not match mesh");
  }

  // Node adjacency through shared elements.
  std::vector<std::vector<NodeId>> adjacency(mesh.node_count());
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const auto nodes = mesh.element(e);
    for (NodeId a : nodes) adjacency[a].insert(adjacency[a].end(), nodes.begin(), nodes.end());
  }
  std::vector<std::vector<CsrMatrix::Index>> row_columns(mesh.node_count() * dim);
  for (std::size_t node = 0; node < mesh.node_count(); ++node) {
    auto& adj = adjacency[node];
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    std::vector<CsrMatrix::Index> cols;
    cols.reserve(adj.size() * dim);
    for (NodeId m : adj) {
      for (int c = 0; c < dim; ++c) cols.push_back(static_cast<CsrMatrix::Index>(m * dim + c));
    }
    for (int c = 0; c < dim; ++c) row_columns[node * dim + c] = cols;
    adj.clear();
    adj.shrink_to_fit();
  }

  GlobalSystem sys;
  sys.dofs_per_node = dim;
  const auto ndof = static_cast<CsrMatrix::Index>(mesh.node_count() * dim);
  sys.stiffness = make_pattern(ndof, ndof, row_columns);
  if (dim == 3) {
    scatter_all<3>(mesh, phases, sys.stiffness);
  } else {
    scatter_all<2>(mesh, phases, sys.stiffness);
  }
  return sys;
}

}  // namespace rve
