#pragma once

#include <array>
#include <map>
#include <vector>

#include <Eigen/Core>

#include "hpstokes/cell_map.hpp"

namespace hpstokes {

struct Cell {
  std::array<int, 4> v{-1, -1, -1, -1};  // corner vertices, counterclockwise
  int level = 0;
  int parent = -1;
  std::array<int, 4> children{-1, -1, -1, -1};
  bool active = true;

  bool refined() const { return children[0] >= 0; }
};

enum class FaceKind { interior, boundary, hanging_parent, hanging_sub };

/// A mesh face.  Conforming interior faces join two active cells; an edge
/// carrying a hanging vertex is stored as one hanging_parent face (the
/// coarse cell's full edge) plus two hanging_sub faces, each joining a fine
/// cell (cell_a) with the coarse cell (cell_b).  The canonical face
/// parameter t in [0,1] runs from v[0] to v[1]; ra/rb give the local edge
/// parameter of the respective cell side at t=0 and t=1.
struct Face {
  std::array<int, 2> v{-1, -1};
  FaceKind kind = FaceKind::boundary;
  int cell_a = -1, side_a = -1;
  int cell_b = -1, side_b = -1;
  double ra0 = 0.0, ra1 = 1.0;
  double rb0 = 0.0, rb1 = 1.0;
  int parent = -1;                  // hanging_sub: id of the hanging_parent face
  std::array<int, 2> subs{-1, -1};  // hanging_parent: sub-face ids
  int hanging_vertex = -1;          // hanging_parent
  int boundary_tag = -1;

  bool integrable_interior() const {
    return kind == FaceKind::interior || kind == FaceKind::hanging_sub;
  }
};

/// Quadrilateral mesh with isotropic 1->4 refinement and one-irregular
/// (at most one hanging vertex per edge) closure.  Cells are never removed;
/// refined cells become inactive parents of their four children.
/// Refinement is an exclusive single-writer operation; all queries are
/// read-only and safe for concurrent readers.
class Mesh {
 public:
  int n_vertices() const { return static_cast<int>(vertices_.size()); }
  int n_cells() const { return static_cast<int>(cells_.size()); }
  int n_active_cells() const;
  const Vec2& vertex(int v) const { return vertices_[v]; }
  const Cell& cell(int c) const { return cells_[c]; }
  std::vector<int> active_cells() const;

  const std::vector<Face>& faces() const;
  const Face& face(int f) const { return faces()[f]; }
  int n_faces() const { return static_cast<int>(faces().size()); }

  std::array<Vec2, 4> cell_corners(int c) const;
  BilinearMap cell_map(int c) const { return BilinearMap(cell_corners(c)); }
  double cell_diameter(int c) const;
  double cell_area(int c) const;
  double face_length(int f) const;
  double total_active_area() const;

  /// Interior and boundary faces adjacent to an active cell; hanging edges
  /// contribute their sub-faces, never the parent face.
  std::vector<int> cell_faces(int c) const;

  /// The cell plus every active cell sharing a full or partial edge with it.
  std::vector<int> cell_patch(int c) const;

  /// The two active cells meeting at an interior face (fine and coarse cell
  /// for a hanging sub-face).  Throws for boundary or hanging-parent faces.
  std::vector<int> face_patch(int f) const;

  std::vector<int> edge_neighbors(int c) const;

  /// Active cell pairs whose closures intersect (shared vertex or shared
  /// full/partial edge), each pair listed once.
  std::vector<std::pair<int, int>> adjacent_pairs() const;

  /// Refine the marked active cells 1->4 and transitively refine whatever
  /// else the one-irregular rule requires.  Inactive ids are ignored.
  void refine(const std::vector<int>& marked);

  int add_vertex(const Vec2& p);  // deduplicating
  int add_cell(const std::array<int, 4>& corners, int level);

 private:
  void split(int c);
  void refine_one(int c);
  void build_faces() const;

  std::vector<Vec2> vertices_;
  std::vector<Cell> cells_;
  std::map<std::pair<double, double>, int> vertex_index_;
  mutable std::vector<Face> faces_;
  mutable bool faces_valid_ = false;
};

/// Uniform mesh of the L-shaped domain (-1,1)^2 \ [0,1]x[-1,0] made of
/// n_initial = 3*4^k axis-aligned squares.  Throws for other n_initial.
Mesh make_l_shape_mesh(int n_initial);

/// Reference coordinates of the point at traversal parameter r on a cell
/// side (sides run counterclockwise from corner s to corner s+1).
inline Vec2 side_reference_point(int side, double r) {
  switch (side) {
    case 0: return Vec2(r, 0.0);
    case 1: return Vec2(1.0, r);
    case 2: return Vec2(1.0 - r, 1.0);
    default: return Vec2(0.0, 1.0 - r);
  }
}

struct RegularityViolation {
  int cell_a = -1, cell_b = -1;
  bool h_violation = false, p_violation = false;
};

struct RegularityReport {
  bool regular = true;
  std::vector<RegularityViolation> violations;
};

/// Checks (gamma_h, gamma_p)-regularity over all pairs of active cells with
/// intersecting closures (vertex adjacency).
RegularityReport check_regularity(const Mesh& mesh, const std::vector<int>& degrees,
                                  double gamma_h, double gamma_p);

}  // namespace hpstokes
