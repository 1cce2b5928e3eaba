#pragma once

#include <functional>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "hpstokes/mesh.hpp"

namespace hpstokes {

using ScalarField = std::function<double(const Vec2&)>;
using VectorField = std::function<Vec2(const Vec2&)>;

/// One affine relation dof = sum_k coeff_k * master_k + inhomogeneity.
struct ConstraintLine {
  int dof = -1;
  std::vector<std::pair<int, double>> terms;
  double inhomogeneity = 0.0;
};

/// A set of affine constraints on a global dof vector.  After close() all
/// chains are resolved (masters are unconstrained) and the free-dof
/// numbering plus per-dof expansions are available.
class ConstraintSet {
 public:
  ConstraintSet() = default;
  explicit ConstraintSet(int n_dofs) : n_dofs_(n_dofs), line_of_(n_dofs, -1) {}

  int n_dofs() const { return n_dofs_; }
  int n_constrained() const { return static_cast<int>(lines_.size()); }
  int n_free() const { return n_dofs_ - n_constrained(); }

  bool is_constrained(int dof) const { return line_of_[dof] >= 0; }
  const ConstraintLine* line(int dof) const {
    return is_constrained(dof) ? &lines_[line_of_[dof]] : nullptr;
  }

  /// Adds a line; re-adding an identical inhomogeneity-only line (repeated
  /// Dirichlet corner) is a no-op, any other duplicate throws.
  void add_line(ConstraintLine line);

  /// Substitutes constrained masters until every line references only free
  /// dofs.  Idempotent; may be called repeatedly while building.
  void resolve();

  void close();
  bool closed() const { return closed_; }

  int free_index(int dof) const { return full_to_free_[dof]; }
  int full_index(int free) const { return free_to_full_[free]; }

  /// Expansion of a full dof into free-indexed terms plus inhomogeneity.
  struct Expansion {
    std::vector<std::pair<int, double>> terms;
    double inhomogeneity = 0.0;
  };
  const Expansion& expansion(int dof) const { return expansions_[dof]; }

  /// Overwrites constrained entries of a full vector from their masters.
  void distribute(Eigen::VectorXd& full) const;

  /// Lifts a reduced vector to a full vector (constraints applied).
  Eigen::VectorXd expand(const Eigen::VectorXd& reduced) const;

  /// Gathers the free entries of a full vector.
  Eigen::VectorXd reduce(const Eigen::VectorXd& full) const;

 private:
  int n_dofs_ = 0;
  std::vector<int> line_of_;
  std::vector<ConstraintLine> lines_;
  bool closed_ = false;
  std::vector<int> full_to_free_, free_to_full_;
  std::vector<Expansion> expansions_;
};

/// Trace of one cell side on a face entity: degree+1 dofs with their
/// positions on the [0,1] parametrization of the (parent) edge.
struct FaceSideTrace {
  int cell = -1;
  int degree = 0;
  std::vector<int> dofs;
  std::vector<double> params;
};

/// An interior face whose adjacent traces are not identified outright and
/// therefore carry continuity constraints.  For hanging entities sides[0]
/// is the coarse (full-edge) side.
struct FaceEntityInfo {
  bool hanging = false;
  std::vector<FaceSideTrace> sides;
};

/// Global numbering of one scalar Lobatto-Lagrange field with per-cell
/// degrees: vertex dofs shared at mesh vertices, edge dofs shared across
/// conforming equal-degree faces, cell-interior dofs private.
struct ScalarLayout {
  int n_dofs = 0;
  std::vector<std::vector<int>> cell_dofs;  // per cell, (d+1)^2 lexicographic
  std::vector<Vec2> support_points;         // per dof
  std::vector<FaceEntityInfo> entities;

  struct BoundarySide {
    int face = -1;
    int cell = -1;
    std::vector<int> dofs;  // full trace including corners
  };
  std::vector<BoundarySide> boundary_sides;
};

ScalarLayout build_scalar_layout(const Mesh& mesh, const std::vector<int>& degrees);

/// The hp Taylor-Hood space: continuous velocity of per-cell degree p_K
/// (two components) and continuous pressure of degree p_K - 1.  Global dof
/// numbering is [u_x | u_y | pressure].  Immutable once built; the mesh
/// must outlive the space and stay unrefined while it is in use.
class HpSpace {
 public:
  HpSpace(const Mesh& mesh, std::vector<int> degrees);

  const Mesh& mesh() const { return *mesh_; }
  const std::vector<int>& degrees() const { return degrees_; }
  int velocity_degree(int cell) const { return degrees_[cell]; }
  int pressure_degree(int cell) const { return degrees_[cell] - 1; }

  int n_scalar_velocity() const { return velocity_.n_dofs; }
  int n_velocity() const { return 2 * velocity_.n_dofs; }
  int n_pressure() const { return pressure_.n_dofs; }
  int n_total() const { return n_velocity() + n_pressure(); }

  int velocity_global(int component, int scalar_dof) const {
    return component * velocity_.n_dofs + scalar_dof;
  }
  int pressure_global(int pressure_dof) const { return 2 * velocity_.n_dofs + pressure_dof; }

  const ScalarLayout& velocity_layout() const { return velocity_; }
  const ScalarLayout& pressure_layout() const { return pressure_; }

 private:
  const Mesh* mesh_;
  std::vector<int> degrees_;
  ScalarLayout velocity_, pressure_;
};

/// Continuity constraints (hanging nodes and degree mismatches, minimum
/// rule), Dirichlet values for the velocity on the tagged boundary, and the
/// zero-mean pressure constraint.  The returned set is closed.
ConstraintSet build_constraints(const HpSpace& space, const std::set<int>& dirichlet_tags,
                                const VectorField& g);

/// Nodal interpolation of (u, rho) into the space; no constraints applied.
Eigen::VectorXd interpolate(const HpSpace& space, const VectorField& u, const ScalarField& rho);

// Pointwise evaluation of a full coefficient vector on a cell.
Vec2 velocity_value(const HpSpace&, const Eigen::VectorXd& coeffs, int cell, const Vec2& ref);
/// Rows are components, columns derivatives: (i,j) = d u_i / d x_j.
Eigen::Matrix2d velocity_gradient(const HpSpace&, const Eigen::VectorXd& coeffs, int cell,
                                  const Vec2& ref);
Vec2 velocity_laplacian(const HpSpace&, const Eigen::VectorXd& coeffs, int cell, const Vec2& ref);
double velocity_divergence(const HpSpace&, const Eigen::VectorXd& coeffs, int cell,
                           const Vec2& ref);
double pressure_value(const HpSpace&, const Eigen::VectorXd& coeffs, int cell, const Vec2& ref);
Vec2 pressure_gradient(const HpSpace&, const Eigen::VectorXd& coeffs, int cell, const Vec2& ref);

}  // namespace hpstokes
