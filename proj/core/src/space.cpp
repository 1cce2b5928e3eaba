#include "hpstokes/space.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "hpstokes/lagrange.hpp"
#include "hpstokes/quadrature.hpp"

namespace hpstokes {

namespace {

// Lexicographic indices of the degree+1 nodes along a side, ordered from
// the side's start corner to its end corner.  The traversal parameter of
// the k-th entry is the k-th Lobatto node (the node set is symmetric).
std::vector<int> side_local_indices(int d, int side) {
  const int n = d + 1;
  std::vector<int> idx(n);
  for (int k = 0; k <= d; ++k) {
    switch (side) {
      case 0: idx[k] = k; break;                      // (k, 0)
      case 1: idx[k] = d + k * n; break;              // (d, k)
      case 2: idx[k] = (d - k) + d * n; break;        // (d-k, d)
      case 3: idx[k] = (d - k) * n; break;            // (0, d-k)
      default: throw std::logic_error("side_local_indices");
    }
  }
  return idx;
}

void accumulate_terms(std::vector<std::pair<int, double>>& terms) {
  std::sort(terms.begin(), terms.end());
  std::vector<std::pair<int, double>> merged;
  for (const auto& [dof, c] : terms) {
    if (!merged.empty() && merged.back().first == dof)
      merged.back().second += c;
    else
      merged.emplace_back(dof, c);
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(),
                              [](const auto& t) { return std::abs(t.second) < 1e-14; }),
               merged.end());
  terms = std::move(merged);
}

}  // namespace

// ---------------------------------------------------------------------------
// ConstraintSet

void ConstraintSet::add_line(ConstraintLine line) {
  if (closed_) throw std::logic_error("ConstraintSet::add_line: set is closed");
  if (line_of_[line.dof] >= 0) {
    const ConstraintLine& old = lines_[line_of_[line.dof]];
    if (old.terms.empty() && line.terms.empty() &&
        std::abs(old.inhomogeneity - line.inhomogeneity) <=
            1e-12 * (1.0 + std::abs(old.inhomogeneity)))
      return;
    throw std::logic_error("ConstraintSet::add_line: dof is already constrained");
  }
  line_of_[line.dof] = static_cast<int>(lines_.size());
  lines_.push_back(std::move(line));
}

void ConstraintSet::resolve() {
  for (int pass = 0;; ++pass) {
    if (pass > 100) throw std::logic_error("ConstraintSet::resolve: constraint chain cycle");
    bool changed = false;
    for (ConstraintLine& line : lines_) {
      bool needs = false;
      for (const auto& [m, c] : line.terms)
        if (line_of_[m] >= 0) needs = true;
      if (!needs) continue;
      changed = true;
      std::vector<std::pair<int, double>> terms;
      double inhom = line.inhomogeneity;
      for (const auto& [m, c] : line.terms) {
        if (line_of_[m] >= 0) {
          const ConstraintLine& ml = lines_[line_of_[m]];
          for (const auto& [mm, cc] : ml.terms) terms.emplace_back(mm, c * cc);
          inhom += c * ml.inhomogeneity;
        } else {
          terms.emplace_back(m, c);
        }
      }
      accumulate_terms(terms);
      line.terms = std::move(terms);
      line.inhomogeneity = inhom;
    }
    if (!changed) return;
  }
}

void ConstraintSet::close() {
  resolve();
  full_to_free_.assign(n_dofs_, -1);
  free_to_full_.clear();
  free_to_full_.reserve(n_free());
  for (int dof = 0; dof < n_dofs_; ++dof) {
    if (line_of_[dof] < 0) {
      full_to_free_[dof] = static_cast<int>(free_to_full_.size());
      free_to_full_.push_back(dof);
    }
  }
  expansions_.assign(n_dofs_, {});
  for (int dof = 0; dof < n_dofs_; ++dof) {
    Expansion& e = expansions_[dof];
    if (line_of_[dof] < 0) {
      e.terms = {{full_to_free_[dof], 1.0}};
    } else {
      const ConstraintLine& line = lines_[line_of_[dof]];
      e.inhomogeneity = line.inhomogeneity;
      e.terms.reserve(line.terms.size());
      for (const auto& [m, c] : line.terms) e.terms.emplace_back(full_to_free_[m], c);
    }
  }
  closed_ = true;
}

void ConstraintSet::distribute(Eigen::VectorXd& full) const {
  for (const ConstraintLine& line : lines_) {
    double v = line.inhomogeneity;
    for (const auto& [m, c] : line.terms) v += c * full[m];
    full[line.dof] = v;
  }
}

Eigen::VectorXd ConstraintSet::expand(const Eigen::VectorXd& reduced) const {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(n_dofs_);
  for (int i = 0; i < static_cast<int>(free_to_full_.size()); ++i)
    full[free_to_full_[i]] = reduced[i];
  distribute(full);
  return full;
}

Eigen::VectorXd ConstraintSet::reduce(const Eigen::VectorXd& full) const {
  Eigen::VectorXd r(free_to_full_.size());
  for (int i = 0; i < static_cast<int>(free_to_full_.size()); ++i) r[i] = full[free_to_full_[i]];
  return r;
}

// ---------------------------------------------------------------------------
// Scalar layout

ScalarLayout build_scalar_layout(const Mesh& mesh, const std::vector<int>& deg) {
  ScalarLayout layout;
  layout.cell_dofs.resize(mesh.n_cells());

  // Vertex dofs.
  std::map<int, int> vertex_dof;
  for (int c : mesh.active_cells()) {
    for (int k = 0; k < 4; ++k) {
      const int v = mesh.cell(c).v[k];
      if (!vertex_dof.count(v)) {
        vertex_dof[v] = layout.n_dofs++;
        layout.support_points.push_back(mesh.vertex(v));
      }
    }
  }

  // Edge dofs, one block per face side (shared across conforming
  // equal-degree pairs).  Traversal order of the owning side.
  std::vector<std::array<std::vector<int>, 4>> side_dofs(mesh.n_cells());
  std::map<int, int> entity_of_parent_face;  // hanging_parent face -> entity index

  auto alloc_side = [&](int cell, int side, const Vec2& start, const Vec2& end) {
    const int d = deg[cell];
    std::vector<int> ids(d - 1);
    const auto& nodes = lagrange_basis(d).nodes();
    for (int k = 1; k < d; ++k) {
      ids[k - 1] = layout.n_dofs++;
      layout.support_points.push_back(start + nodes[k] * (end - start));
    }
    side_dofs[cell][side] = ids;
    return ids;
  };
  auto side_trace = [&](int cell, int side) {
    // Full trace (corners + interior) in traversal order.
    const Cell& c = mesh.cell(cell);
    std::vector<int> dofs;
    dofs.push_back(vertex_dof.at(c.v[side]));
    for (int id : side_dofs[cell][side]) dofs.push_back(id);
    dofs.push_back(vertex_dof.at(c.v[(side + 1) % 4]));
    return dofs;
  };

  const auto& faces = mesh.faces();
  for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
    const Face& face = faces[f];
    const Vec2 pa = mesh.vertex(face.v[0]);
    const Vec2 pb = mesh.vertex(face.v[1]);
    switch (face.kind) {
      case FaceKind::interior: {
        const int da = deg[face.cell_a], db = deg[face.cell_b];
        if (da == db) {
          const auto ids = alloc_side(face.cell_a, face.side_a, pa, pb);
          // The other side traverses the edge in the opposite direction.
          std::vector<int> rev(ids.rbegin(), ids.rend());
          side_dofs[face.cell_b][face.side_b] = face.rb0 == 0.0 ? ids : rev;
        } else {
          const Vec2 b_start = face.rb0 == 0.0 ? pa : pb;
          const Vec2 b_end = face.rb0 == 0.0 ? pb : pa;
          alloc_side(face.cell_a, face.side_a, pa, pb);
          alloc_side(face.cell_b, face.side_b, b_start, b_end);
        }
        break;
      }
      case FaceKind::boundary: {
        alloc_side(face.cell_a, face.side_a, pa, pb);
        break;
      }
      case FaceKind::hanging_parent: {
        alloc_side(face.cell_a, face.side_a, pa, pb);
        FaceEntityInfo entity;
        entity.hanging = true;
        entity_of_parent_face[f] = static_cast<int>(layout.entities.size());
        layout.entities.push_back(entity);
        break;
      }
      case FaceKind::hanging_sub: {
        alloc_side(face.cell_a, face.side_a, pa, pb);
        break;
      }
    }
  }

  // Interior (bubble) dofs.
  for (int c : mesh.active_cells()) {
    const int d = deg[c];
    const auto& nodes = lagrange_basis(d).nodes();
    const BilinearMap map = mesh.cell_map(c);
    auto& dofs = layout.cell_dofs[c];
    dofs.assign((d + 1) * (d + 1), -1);
    for (int j = 1; j < d; ++j) {
      for (int i = 1; i < d; ++i) {
        dofs[i + j * (d + 1)] = layout.n_dofs++;
        layout.support_points.push_back(map.to_physical(Vec2(nodes[i], nodes[j])));
      }
    }
  }

  // Assemble the per-cell local-to-global maps.
  for (int c : mesh.active_cells()) {
    const int d = deg[c];
    const int n = d + 1;
    auto& dofs = layout.cell_dofs[c];
    for (int s = 0; s < 4; ++s) {
      dofs[side_local_indices(d, s)[0]] = vertex_dof.at(mesh.cell(c).v[s]);
      const auto idx = side_local_indices(d, s);
      const auto& edge = side_dofs[c][s];
      for (int k = 1; k < d; ++k) dofs[idx[k]] = edge[k - 1];
    }
    for (int i = 0; i < n * n; ++i)
      if (dofs[i] < 0) throw std::logic_error("build_scalar_layout: unassigned local dof");
  }

  // Face entities for constraints: traces with parameters on the parent
  // edge's canonical [0,1] parametrization.
  auto trace_on = [&](int cell, int side, double r0, double r1) {
    FaceSideTrace trace;
    trace.cell = cell;
    trace.degree = deg[cell];
    trace.dofs = side_trace(cell, side);
    const auto& nodes = lagrange_basis(trace.degree).nodes();
    trace.params.resize(trace.dofs.size());
    for (size_t k = 0; k < trace.params.size(); ++k)
      trace.params[k] = r0 + (r1 - r0) * nodes[k];
    return trace;
  };

  for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
    const Face& face = faces[f];
    if (face.kind == FaceKind::interior && deg[face.cell_a] != deg[face.cell_b]) {
      FaceEntityInfo entity;
      entity.hanging = false;
      entity.sides.push_back(trace_on(face.cell_a, face.side_a, 0.0, 1.0));
      entity.sides.push_back(trace_on(face.cell_b, face.side_b, face.rb0, face.rb1));
      layout.entities.push_back(entity);
    } else if (face.kind == FaceKind::hanging_parent) {
      FaceEntityInfo& entity = layout.entities[entity_of_parent_face.at(f)];
      entity.sides.push_back(trace_on(face.cell_a, face.side_a, 0.0, 1.0));
    } else if (face.kind == FaceKind::hanging_sub) {
      // Parameters on the parent edge: the canonical parameter of the sub
      // face maps affinely to the coarse side's traversal parameter.
      FaceEntityInfo& entity = layout.entities[entity_of_parent_face.at(face.parent)];
      entity.sides.push_back(trace_on(face.cell_a, face.side_a, face.rb0, face.rb1));
    } else if (face.kind == FaceKind::boundary) {
      ScalarLayout::BoundarySide bs;
      bs.face = f;
      bs.cell = face.cell_a;
      bs.dofs = side_trace(face.cell_a, face.side_a);
      layout.boundary_sides.push_back(bs);
    }
  }
  return layout;
}

// ---------------------------------------------------------------------------
// HpSpace

HpSpace::HpSpace(const Mesh& mesh, std::vector<int> degrees)
    : mesh_(&mesh), degrees_(std::move(degrees)) {
  if (static_cast<int>(degrees_.size()) < mesh.n_cells())
    throw std::invalid_argument("HpSpace: degree vector shorter than the cell list");
  std::vector<int> pressure_deg(degrees_.size());
  for (int c : mesh.active_cells()) {
    if (degrees_[c] < 2)
      throw std::invalid_argument("HpSpace: velocity degree must be >= 2 (Taylor-Hood)");
    pressure_deg[c] = degrees_[c] - 1;
  }
  velocity_ = build_scalar_layout(mesh, degrees_);
  pressure_ = build_scalar_layout(mesh, pressure_deg);
}

// ---------------------------------------------------------------------------
// Constraints

namespace {

// Adds the continuity constraints of one face entity: the trace space is
// the minimum-degree polynomial on the full parent edge, spanned by a
// spread subset of the master side's nodes; every other node interpolates.
void constrain_entity(const FaceEntityInfo& entity, ConstraintSet& cs, int offset) {
  int master = 0;
  int d_min = entity.sides[0].degree;
  for (const FaceSideTrace& s : entity.sides) d_min = std::min(d_min, s.degree);
  if (!entity.hanging && entity.sides[1].degree < entity.sides[0].degree) master = 1;

  // Master nodes sorted by parameter; pick d_min+1 spread indices.
  const FaceSideTrace& m = entity.sides[master];
  std::vector<std::pair<double, int>> nodes(m.dofs.size());
  for (size_t k = 0; k < m.dofs.size(); ++k) nodes[k] = {m.params[k], m.dofs[k]};
  std::sort(nodes.begin(), nodes.end());
  const int dm = m.degree;
  std::vector<double> ms_param(d_min + 1);
  std::vector<int> ms_dof(d_min + 1);
  for (int k = 0; k <= d_min; ++k) {
    const int idx = static_cast<int>(std::lround(double(k) * dm / d_min));
    ms_param[k] = nodes[idx].first;
    ms_dof[k] = nodes[idx].second;
  }
  std::set<int> master_set(ms_dof.begin(), ms_dof.end());

  std::set<int> done;
  for (const FaceSideTrace& side : entity.sides) {
    for (size_t k = 0; k < side.dofs.size(); ++k) {
      const int dof = side.dofs[k];
      if (master_set.count(dof) || done.count(dof)) continue;
      done.insert(dof);
      ConstraintLine line;
      line.dof = offset + dof;
      const double t = side.params[k];
      for (int a = 0; a <= d_min; ++a) {
        double c = 1.0;
        for (int b = 0; b <= d_min; ++b)
          if (b != a) c *= (t - ms_param[b]) / (ms_param[a] - ms_param[b]);
        if (std::abs(c) > 1e-14) line.terms.emplace_back(offset + ms_dof[a], c);
      }
      cs.add_line(std::move(line));
    }
  }
}

}  // namespace

ConstraintSet build_constraints(const HpSpace& space, const std::set<int>& dirichlet_tags,
                                const VectorField& g) {
  const Mesh& mesh = space.mesh();
  ConstraintSet cs(space.n_total());
  const ScalarLayout& vel = space.velocity_layout();
  const ScalarLayout& pre = space.pressure_layout();

  // (a), (b): hanging-node and degree-mismatch continuity.
  for (const FaceEntityInfo& entity : vel.entities) {
    for (int comp = 0; comp < 2; ++comp)
      constrain_entity(entity, cs, comp * vel.n_dofs);
  }
  for (const FaceEntityInfo& entity : pre.entities)
    constrain_entity(entity, cs, 2 * vel.n_dofs);

  // (c): Dirichlet velocity values.
  for (const ScalarLayout::BoundarySide& bs : vel.boundary_sides) {
    if (!dirichlet_tags.count(mesh.face(bs.face).boundary_tag)) continue;
    for (int dof : bs.dofs) {
      const Vec2 value = g(vel.support_points[dof]);
      for (int comp = 0; comp < 2; ++comp) {
        ConstraintLine line;
        line.dof = comp * vel.n_dofs + dof;
        line.inhomogeneity = value[comp];
        cs.add_line(std::move(line));
      }
    }
  }

  cs.resolve();

  // (d): zero mean pressure through one designated dof.
  Eigen::VectorXd w = Eigen::VectorXd::Zero(pre.n_dofs);
  for (int c : mesh.active_cells()) {
    const int d = space.pressure_degree(c);
    const int n1d = d + 2;
    const Quadrature2D& rule = gauss_legendre_2d(n1d);
    const BasisTable& table = basis_table(d, n1d);
    const BilinearMap map = mesh.cell_map(c);
    const auto& dofs = pre.cell_dofs[c];
    for (int q = 0; q < rule.size(); ++q) {
      const double jw = map.jacobian_det(rule.points[q]) * rule.weights[q];
      for (int b = 0; b < table.n_basis; ++b) w[dofs[b]] += jw * table.v(q, b);
    }
  }
  Eigen::VectorXd w_eff = Eigen::VectorXd::Zero(pre.n_dofs);
  const int p_off = 2 * vel.n_dofs;
  for (int i = 0; i < pre.n_dofs; ++i) {
    if (const ConstraintLine* line = cs.line(p_off + i)) {
      for (const auto& [m, c] : line->terms) w_eff[m - p_off] += c * w[i];
    } else {
      w_eff[i] += w[i];
    }
  }
  int designated = -1;
  for (int i = 0; i < pre.n_dofs; ++i) {
    if (cs.is_constrained(p_off + i)) continue;
    if (designated < 0 || std::abs(w_eff[i]) > std::abs(w_eff[designated])) designated = i;
  }
  if (designated < 0) throw std::logic_error("build_constraints: no free pressure dof");
  ConstraintLine mean;
  mean.dof = p_off + designated;
  for (int i = 0; i < pre.n_dofs; ++i) {
    if (i == designated || cs.is_constrained(p_off + i)) continue;
    if (w_eff[i] != 0.0) mean.terms.emplace_back(p_off + i, -w_eff[i] / w_eff[designated]);
  }
  cs.add_line(std::move(mean));

  cs.close();
  return cs;
}

// ---------------------------------------------------------------------------
// Interpolation and evaluation

Eigen::VectorXd interpolate(const HpSpace& space, const VectorField& u, const ScalarField& rho) {
  Eigen::VectorXd coeffs(space.n_total());
  const ScalarLayout& vel = space.velocity_layout();
  const ScalarLayout& pre = space.pressure_layout();
  for (int i = 0; i < vel.n_dofs; ++i) {
    const Vec2 v = u(vel.support_points[i]);
    coeffs[i] = v.x();
    coeffs[vel.n_dofs + i] = v.y();
  }
  for (int i = 0; i < pre.n_dofs; ++i) coeffs[2 * vel.n_dofs + i] = rho(pre.support_points[i]);
  return coeffs;
}

namespace {

struct LocalEval {
  std::vector<double> val;
  std::vector<Vec2> grad;
  std::vector<Hess2> hess;
};

}  // namespace

Vec2 velocity_value(const HpSpace& space, const Eigen::VectorXd& coeffs, int cell,
                    const Vec2& ref) {
  const int d = space.velocity_degree(cell);
  std::vector<double> val;
  tensor_shape_values(d, ref, val);
  const auto& dofs = space.velocity_layout().cell_dofs[cell];
  Vec2 u = Vec2::Zero();
  for (size_t b = 0; b < val.size(); ++b) {
    u.x() += val[b] * coeffs[space.velocity_global(0, dofs[b])];
    u.y() += val[b] * coeffs[space.velocity_global(1, dofs[b])];
  }
  return u;
}

Eigen::Matrix2d velocity_gradient(const HpSpace& space, const Eigen::VectorXd& coeffs, int cell,
                                  const Vec2& ref) {
  const int d = space.velocity_degree(cell);
  std::vector<double> val;
  std::vector<Vec2> grad;
  tensor_shape_values(d, ref, val, &grad);
  const BilinearMap map = space.mesh().cell_map(cell);
  const auto& dofs = space.velocity_layout().cell_dofs[cell];
  Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
  for (size_t b = 0; b < val.size(); ++b) {
    const Vec2 pg = map.push_gradient(ref, grad[b]);
    g.row(0) += coeffs[space.velocity_global(0, dofs[b])] * pg.transpose();
    g.row(1) += coeffs[space.velocity_global(1, dofs[b])] * pg.transpose();
  }
  return g;
}

Vec2 velocity_laplacian(const HpSpace& space, const Eigen::VectorXd& coeffs, int cell,
                        const Vec2& ref) {
  const int d = space.velocity_degree(cell);
  std::vector<double> val;
  std::vector<Vec2> grad;
  std::vector<Hess2> hess;
  tensor_shape_values(d, ref, val, &grad, &hess);
  const BilinearMap map = space.mesh().cell_map(cell);
  const auto& dofs = space.velocity_layout().cell_dofs[cell];
  Vec2 lap = Vec2::Zero();
  for (size_t b = 0; b < val.size(); ++b) {
    const Hess2 h = map.push_hessian(ref, grad[b], hess[b]);
    const double tr = h.xx + h.yy;
    lap.x() += coeffs[space.velocity_global(0, dofs[b])] * tr;
    lap.y() += coeffs[space.velocity_global(1, dofs[b])] * tr;
  }
  return lap;
}

double velocity_divergence(const HpSpace& space, const Eigen::VectorXd& coeffs, int cell,
                           const Vec2& ref) {
  return velocity_gradient(space, coeffs, cell, ref).trace();
}

double pressure_value(const HpSpace& space, const Eigen::VectorXd& coeffs, int cell,
                      const Vec2& ref) {
  const int d = space.pressure_degree(cell);
  std::vector<double> val;
  tensor_shape_values(d, ref, val);
  const auto& dofs = space.pressure_layout().cell_dofs[cell];
  double p = 0.0;
  for (size_t b = 0; b < val.size(); ++b)
    p += val[b] * coeffs[space.pressure_global(dofs[b])];
  return p;
}

Vec2 pressure_gradient(const HpSpace& space, const Eigen::VectorXd& coeffs, int cell,
                       const Vec2& ref) {
  const int d = space.pressure_degree(cell);
  std::vector<double> val;
  std::vector<Vec2> grad;
  tensor_shape_values(d, ref, val, &grad);
  const BilinearMap map = space.mesh().cell_map(cell);
  const auto& dofs = space.pressure_layout().cell_dofs[cell];
  Vec2 g = Vec2::Zero();
  for (size_t b = 0; b < val.size(); ++b)
    g += coeffs[space.pressure_global(dofs[b])] * map.push_gradient(ref, grad[b]);
  return g;
}

}  // namespace hpstokes
