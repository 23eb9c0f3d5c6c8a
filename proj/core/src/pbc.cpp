#include "rve/pbc.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <fmt/format.h>

#include "rve/errors.hpp"

namespace rve {

MacroStrain::MacroStrain(int dim) : dim_(dim) {
  if (dim != 2 && dim != 3) throw ConfigError(fmt::format("dimension must be 2 or 3, got {}", dim));
}

MacroStrain::MacroStrain(int dim, std::span<const double> voigt) : MacroStrain(dim) {
  if (static_cast<int>(voigt.size()) != size()) {
    throw ConfigError(fmt::format("{}D macro strain needs {} components, got {}", dim, size(),
                                  voigt.size()));
  }
  std::copy(voigt.begin(), voigt.end(), values_.begin());
}

MacroStrain MacroStrain::unit(int dim, int component, double magnitude) {
  MacroStrain s(dim);
  if (component < 0 || component >= s.size()) {
    throw ConfigError(fmt::format("Voigt component {} out of range", component));
  }
  s[component] = magnitude;
  return s;
}

Eigen::VectorXd MacroStrain::voigt() const {
  Eigen::VectorXd v(size());
  for (int i = 0; i < size(); ++i) v(i) = values_[static_cast<std::size_t>(i)];
  return v;
}

Eigen::Matrix3d MacroStrain::tensor() const {
  Eigen::Matrix3d e = Eigen::Matrix3d::Zero();
  if (dim_ == 3) {
    e(0, 0) = values_[0];
    e(1, 1) = values_[1];
    e(2, 2) = values_[2];
    e(0, 1) = e(1, 0) = 0.5 * values_[3];
    e(0, 2) = e(2, 0) = 0.5 * values_[4];
    e(1, 2) = e(2, 1) = 0.5 * values_[5];
  } else {
    e(0, 0) = values_[0];
    e(1, 1) = values_[1];
    e(0, 1) = e(1, 0) = 0.5 * values_[2];
  }
  return e;
}

MacroStrain MacroStrain::operator+(const MacroStrain& other) const {
  if (other.dim_ != dim_) throw ConfigError("cannot add macro strains of different dimension");
  MacroStrain s(dim_);
  for (int i = 0; i < size(); ++i) s[i] = (*this)[i] + other[i];
  return s;
}

void ConstraintSet::validate(std::size_t dof_count) const {
  std::unordered_map<Dof, const Relation*> slaves;
  slaves.reserve(relations.size());
  auto in_range = [&](Dof d) { return d >= 0 && static_cast<std::size_t>(d) < dof_count; };
  for (const Relation& r : relations) {
    if (!in_range(r.slave) || !in_range(r.master)) {
      throw ConstraintError(fmt::format("relation {} -> {} references a dof outside [0, {})", r.slave,
                                        r.master, dof_count));
    }
    if (r.slave == r.master) throw ConstraintError(fmt::format("dof {} is slaved to itself", r.slave));
    auto [it, inserted] = slaves.emplace(r.slave, &r);
    if (!inserted && (it->second->master != r.master || it->second->offset != r.offset)) {
      throw ConstraintError(fmt::format("dof {} is slaved twice with different relations", r.slave));
    }
  }
  for (const Relation& r : relations) {
    if (slaves.contains(r.master)) {
      throw ConstraintError(
          fmt::format("constraint chain: master dof {} is itself a slave", r.master));
    }
  }
  std::unordered_map<Dof, double> pinned;
  for (const Pin& p : pins) {
    if (!in_range(p.dof)) throw ConstraintError(fmt::format("pin on dof {} out of range", p.dof));
    if (slaves.contains(p.dof)) throw ConstraintError(fmt::format("dof {} is both slave and pinned", p.dof));
    auto [it, inserted] = pinned.emplace(p.dof, p.value);
    if (!inserted && it->second != p.value) {
      throw ConstraintError(fmt::format("dof {} pinned twice with different values", p.dof));
    }
  }
}

ConstraintSet build_constraints(const NodeSets& sets, const MacroStrain& strain) {
  if (strain.dim() != sets.dim) throw ConfigError("macro strain dimension does not match the mesh");
  const int dim = sets.dim;
  const Eigen::Matrix3d e = strain.tensor();

  ConstraintSet out;
  out.dofs_per_node = dim;
  for (const BoundarySet* set : sets.all_sets()) {
    const BoundarySet& master = sets.canonical_of(*set);
    if (&master == set) continue;
    if (master.nodes.size() != set->nodes.size()) {
      throw MeshError(fmt::format("boundary sets '{}' and '{}' differ in size", set->name, master.name));
    }
    const Point dx = sets.pairing_offset(*set);
    const Eigen::Vector3d g = e * Eigen::Vector3d(dx[0], dx[1], dx[2]);
    for (std::size_t i = 0; i < set->nodes.size(); ++i) {
      for (int c = 0; c < dim; ++c) {
        out.relations.push_back(
            {set->nodes[i] * dim + c, master.nodes[i] * dim + c, g(c)});
      }
    }
  }
  return out;
}

ConstraintSet pin_rigid_body(ConstraintSet constraints, const NodeSets& sets) {
  const BoundarySet& a = sets.find("A");
  if (a.nodes.size() != 1) throw MeshError("vertex A must contain exactly one node");
  const int dim = sets.dim;
  for (int c = 0; c < dim; ++c) constraints.pins.push_back({a.nodes.front() * dim + c, 0.0});
  return constraints;
}

RecoveryMap make_recovery_map(const ConstraintSet& constraints, std::size_t dof_count) {
  constraints.validate(dof_count);

  constexpr CsrMatrix::Index kFree = -2;
  constexpr CsrMatrix::Index kFixed = -1;
  RecoveryMap map;
  map.column.assign(dof_count, kFree);
  map.shift.assign(dof_count, 0.0);

  for (const Pin& p : constraints.pins) {
    map.column[p.dof] = kFixed;
    map.shift[p.dof] = p.value;
  }
  std::vector<Dof> master_of(dof_count, -1);
  for (const Relation& r : constraints.relations) master_of[r.slave] = r.master;

  CsrMatrix::Index next = 0;
  for (std::size_t i = 0; i < dof_count; ++i) {
    if (map.column[i] == kFree && master_of[i] < 0) map.column[i] = next++;
  }
  map.reduced_size = next;
  for (const Relation& r : constraints.relations) {
    map.column[r.slave] = map.column[r.master];
    map.shift[r.slave] = r.offset + map.shift[r.master];
  }
  return map;
}

CsrMatrix reduce_stiffness(const CsrMatrix& k, const RecoveryMap& map) {
  const CsrMatrix::Index n = map.reduced_size;

  // Full rows contributing to each reduced row, in full-dof order.
  std::vector<std::vector<CsrMatrix::Index>> sources(static_cast<std::size_t>(n));
  for (CsrMatrix::Index i = 0; i < k.rows; ++i) {
    if (map.column[i] >= 0) sources[map.column[i]].push_back(i);
  }

  std::vector<std::vector<CsrMatrix::Index>> pattern(static_cast<std::size_t>(n));
  std::vector<CsrMatrix::Index> marker(static_cast<std::size_t>(n), -1);
  for (CsrMatrix::Index r = 0; r < n; ++r) {
    auto& cols = pattern[r];
    for (CsrMatrix::Index i : sources[r]) {
      for (CsrMatrix::Index p = k.row_ptr[i]; p < k.row_ptr[i + 1]; ++p) {
        const CsrMatrix::Index c = map.column[k.col[p]];
        if (c >= 0 && marker[c] != r) {
          marker[c] = r;
          cols.push_back(c);
        }
      }
    }
    std::sort(cols.begin(), cols.end());
  }

  CsrMatrix kr = make_pattern(n, n, pattern);
  pattern.clear();
  pattern.shrink_to_fit();

  // Dense scatter row by row keeps the summation order fixed.
  std::vector<double> accum(static_cast<std::size_t>(n), 0.0);
  for (CsrMatrix::Index r = 0; r < n; ++r) {
    for (CsrMatrix::Index i : sources[r]) {
      for (CsrMatrix::Index p = k.row_ptr[i]; p < k.row_ptr[i + 1]; ++p) {
        const CsrMatrix::Index c = map.column[k.col[p]];
        if (c >= 0) accum[c] += k.val[p];
      }
    }
    for (CsrMatrix::Index p = kr.row_ptr[r]; p < kr.row_ptr[r + 1]; ++p) {
      kr.val[p] = accum[kr.col[p]];
      accum[kr.col[p]] = 0.0;
    }
  }
  // T^T K T is symmetric in exact arithmetic; remove rounding asymmetry.
  for (CsrMatrix::Index r = 0; r < n; ++r) {
    for (CsrMatrix::Index p = kr.row_ptr[r]; p < kr.row_ptr[r + 1]; ++p) {
      const CsrMatrix::Index c = kr.col[p];
      if (c > r) {
        const auto first = kr.col.begin() + kr.row_ptr[c];
        const auto last = kr.col.begin() + kr.row_ptr[c + 1];
        const auto q = static_cast<std::size_t>(std::lower_bound(first, last, r) - kr.col.begin());
        const double avg = 0.5 * (kr.val[p] + kr.val[q]);
        kr.val[p] = avg;
        kr.val[q] = avg;
      }
    }
  }
  return kr;
}

std::vector<double> reduce_load(const CsrMatrix& k, const RecoveryMap& map) {
  const std::vector<double> kg = k.multiply(map.shift);
  std::vector<double> f(static_cast<std::size_t>(map.reduced_size), 0.0);
  for (std::size_t i = 0; i < kg.size(); ++i) {
    if (map.column[i] >= 0) f[map.column[i]] -= kg[i];
  }
  return f;
}

ReducedSystem reduce_system(const GlobalSystem& system, const ConstraintSet& constraints) {
  ReducedSystem out;
  out.recovery = make_recovery_map(constraints, system.dof_count());
  out.stiffness = reduce_stiffness(system.stiffness, out.recovery);
  out.load = reduce_load(system.stiffness, out.recovery);
  return out;
}

}  // namespace rve
