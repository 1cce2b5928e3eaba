#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "hpstokes/mesh.hpp"

using namespace hpstokes;

namespace {

// Independent face-count oracle for the uniform L-shape tiling: enumerate
// the grid edges of the present squares directly.
struct FaceCounts {
  int total = 0, boundary = 0, interior = 0;
};

FaceCounts l_shape_face_oracle(int per_side) {
  const auto present = [per_side](int i, int j) {
    if (i < 0 || j < 0 || i >= per_side || j >= per_side) return false;
    return !(i >= per_side / 2 && j < per_side / 2);
  };
  std::map<std::array<int, 4>, int> edges;  // (x0,y0,x1,y1) in grid units
  for (int j = 0; j < per_side; ++j) {
    for (int i = 0; i < per_side; ++i) {
      if (!present(i, j)) continue;
      ++edges[{i, j, i + 1, j}];
      ++edges[{i, j + 1, i + 1, j + 1}];
      ++edges[{i, j, i, j + 1}];
      ++edges[{i + 1, j, i + 1, j + 1}];
    }
  }
  FaceCounts counts;
  for (const auto& [edge, n] : edges) {
    ++counts.total;
    if (n == 1)
      ++counts.boundary;
    else
      ++counts.interior;
  }
  return counts;
}

// Largest number of hanging vertices on any active cell edge, by direct
// geometric scan of active corner vertices.
int max_hanging_per_edge(const Mesh& mesh) {
  std::set<int> corners;
  for (int c : mesh.active_cells())
    for (int k = 0; k < 4; ++k) corners.insert(mesh.cell(c).v[k]);
  int worst = 0;
  for (int c : mesh.active_cells()) {
    for (int s = 0; s < 4; ++s) {
      const Vec2 a = mesh.vertex(mesh.cell(c).v[s]);
      const Vec2 b = mesh.vertex(mesh.cell(c).v[(s + 1) % 4]);
      const double len = (b - a).norm();
      int inside = 0;
      for (int v : corners) {
        const Vec2 p = mesh.vertex(v);
        const double cross = (b - a).x() * (p - a).y() - (b - a).y() * (p - a).x();
        if (std::abs(cross) > 1e-12 * len * len) continue;
        const double t = (p - a).dot(b - a) / (len * len);
        if (t > 1e-12 && t < 1.0 - 1e-12) ++inside;
      }
      worst = std::max(worst, inside);
    }
  }
  return worst;
}

int count_kind(const Mesh& mesh, FaceKind kind) {
  int n = 0;
  for (const Face& f : mesh.faces())
    if (f.kind == kind) ++n;
  return n;
}

}  // namespace

TEST_CASE("make_l_shape_mesh rejects counts not of the form 3*4^k") {
  CHECK_THROWS_AS(make_l_shape_mesh(7), std::invalid_argument);
  CHECK_THROWS_AS(make_l_shape_mesh(6), std::invalid_argument);
  CHECK_THROWS_AS(make_l_shape_mesh(0), std::invalid_argument);
}

TEST_CASE("3-cell L-mesh: unit squares with diameter sqrt(2)") {
  const Mesh mesh = make_l_shape_mesh(3);
  REQUIRE(mesh.n_active_cells() == 3);
  for (int c : mesh.active_cells()) {
    CHECK(mesh.cell_diameter(c) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(mesh.cell_area(c) == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(mesh.total_active_area() == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("12-cell L-mesh: face counts agree with the grid enumeration oracle") {
  const Mesh mesh = make_l_shape_mesh(12);
  REQUIRE(mesh.n_active_cells() == 12);
  const FaceCounts oracle = l_shape_face_oracle(4);
  // Direct enumeration of the 12-square tiling gives 32 faces, 16 of them
  // on the boundary.
  CHECK(oracle.total == 32);
  CHECK(oracle.boundary == 16);
  CHECK(mesh.n_faces() == oracle.total);
  CHECK(count_kind(mesh, FaceKind::boundary) == oracle.boundary);
  CHECK(count_kind(mesh, FaceKind::interior) == oracle.interior);
  CHECK(count_kind(mesh, FaceKind::hanging_parent) == 0);
  CHECK(mesh.total_active_area() == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("48-cell L-mesh builds") {
  const Mesh mesh = make_l_shape_mesh(48);
  CHECK(mesh.n_active_cells() == 48);
  CHECK(mesh.total_active_area() == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("refining one corner cell produces 15 active cells with hanging nodes") {
  Mesh mesh = make_l_shape_mesh(12);
  mesh.refine({0});
  CHECK(mesh.n_active_cells() == 15);
  CHECK(max_hanging_per_edge(mesh) == 1);
  // Cell 0 sits at the outer corner (-1,-1): two interior edges hang.
  CHECK(count_kind(mesh, FaceKind::hanging_parent) == 2);
  CHECK(count_kind(mesh, FaceKind::hanging_sub) == 4);
  CHECK(mesh.total_active_area() == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("uniform refinement stays conforming") {
  Mesh mesh = make_l_shape_mesh(12);
  mesh.refine(mesh.active_cells());
  CHECK(mesh.n_active_cells() == 48);
  CHECK(count_kind(mesh, FaceKind::hanging_parent) == 0);
  CHECK(max_hanging_per_edge(mesh) == 0);
}

TEST_CASE("closure refines neighbors to keep one hanging node per edge") {
  Mesh mesh = make_l_shape_mesh(12);
  mesh.refine({0});
  // Refine the child diagonally opposite the corner twice; its coarse
  // neighbors must be forced along.
  const int child = mesh.cell(0).children[2];
  mesh.refine({child});
  const int grandchild = mesh.cell(child).children[2];
  mesh.refine({grandchild});
  CHECK(max_hanging_per_edge(mesh) == 1);
  for (const auto& [a, b] : mesh.adjacent_pairs()) {
    // Edge-sharing active cells never differ by more than one level.
    bool edge_adjacent = false;
    for (int f : mesh.cell_faces(a))
      if (mesh.face(f).integrable_interior() &&
          (mesh.face(f).cell_a == b || mesh.face(f).cell_b == b))
        edge_adjacent = true;
    if (edge_adjacent) CHECK(std::abs(mesh.cell(a).level - mesh.cell(b).level) <= 1);
  }
  CHECK(mesh.total_active_area() == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("re-marking refined parents is a no-op") {
  Mesh mesh = make_l_shape_mesh(12);
  mesh.refine({0});
  const int cells_before = mesh.n_cells();
  mesh.refine({0});  // now inactive
  CHECK(mesh.n_cells() == cells_before);
}

TEST_CASE("cell_patch matches the tiling adjacency oracle on the 12-cell mesh") {
  const Mesh mesh = make_l_shape_mesh(12);
  // Rebuild the square indices in mesh creation order (j outer, i inner).
  std::vector<std::pair<int, int>> coords;
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i)
      if (!(i >= 2 && j < 2)) coords.emplace_back(i, j);
  REQUIRE(static_cast<int>(coords.size()) == 12);
  for (int c = 0; c < 12; ++c) {
    std::set<int> expected{c};
    for (int d = 0; d < 12; ++d) {
      const int dist = std::abs(coords[c].first - coords[d].first) +
                       std::abs(coords[c].second - coords[d].second);
      if (dist == 1) expected.insert(d);
    }
    const auto patch = mesh.cell_patch(c);
    CHECK(std::set<int>(patch.begin(), patch.end()) == expected);
  }
  // The outer corner square has exactly two edge neighbors.
  CHECK(mesh.cell_patch(0).size() == 3);
}

TEST_CASE("interior cell of a uniform mesh has a 5-cell patch") {
  Mesh mesh = make_l_shape_mesh(12);
  mesh.refine(mesh.active_cells());
  int interior = -1;
  for (int c : mesh.active_cells())
    if (mesh.cell_patch(c).size() == 5) interior = c;
  REQUIRE(interior >= 0);
  const auto patch = mesh.cell_patch(interior);
  CHECK(std::count(patch.begin(), patch.end(), interior) == 1);
}

TEST_CASE("patch of a cell with a refined neighbor includes both children") {
  Mesh mesh = make_l_shape_mesh(12);
  mesh.refine({0});
  // Find a coarse neighbor of cell 0 through a hanging parent face.
  int coarse = -1;
  std::vector<int> fine;
  for (const Face& f : mesh.faces()) {
    if (f.kind == FaceKind::hanging_sub) {
      coarse = f.cell_b;
      fine.push_back(f.cell_a);
    }
  }
  REQUIRE(coarse >= 0);
  const auto patch = mesh.cell_patch(coarse);
  int contained = 0;
  for (int c : fine)
    if (std::count(patch.begin(), patch.end(), c)) ++contained;
  CHECK(contained >= 2);
}

TEST_CASE("face_patch returns the adjacent cells and rejects boundary faces") {
  Mesh mesh = make_l_shape_mesh(12);
  mesh.refine({0});
  for (int f = 0; f < mesh.n_faces(); ++f) {
    const Face& face = mesh.face(f);
    if (face.kind == FaceKind::interior) {
      CHECK(mesh.face_patch(f).size() == 2);
    } else if (face.kind == FaceKind::hanging_sub) {
      const auto patch = mesh.face_patch(f);
      CHECK(patch.size() == 2);
      CHECK(std::count(patch.begin(), patch.end(), face.cell_b) == 1);
      // The sub-face patch is contained in the cell patch of either side.
      for (int cell : {face.cell_a, face.cell_b}) {
        const auto cp = mesh.cell_patch(cell);
        for (int member : patch) CHECK(std::count(cp.begin(), cp.end(), member) == 1);
      }
    } else {
      CHECK_THROWS_AS(mesh.face_patch(f), std::invalid_argument);
    }
  }
}

TEST_CASE("check_regularity") {
  Mesh mesh = make_l_shape_mesh(12);
  std::vector<int> uniform(mesh.n_cells(), 3);
  CHECK(check_regularity(mesh, uniform, 1.0, 1.0).regular);
  CHECK(check_regularity(mesh, uniform, 4.0, 2.0).regular);

  SUBCASE("one-irregular mesh passes gamma_h = 2 (h ratio exactly 2)") {
    mesh.refine({0});
    std::vector<int> deg(mesh.n_cells(), 2);
    CHECK(check_regularity(mesh, deg, 2.0, 2.0).regular);
    CHECK_FALSE(check_regularity(mesh, deg, 1.5, 2.0).regular);
  }

  SUBCASE("degree pair (2,5) violates gamma_p = 2") {
    std::vector<int> deg(mesh.n_cells(), 2);
    deg[5] = 5;
    const auto report = check_regularity(mesh, deg, 2.0, 2.0);
    CHECK_FALSE(report.regular);
    bool found = false;
    for (const auto& v : report.violations)
      if (v.p_violation && (v.cell_a == 5 || v.cell_b == 5)) found = true;
    CHECK(found);
    CHECK(check_regularity(mesh, deg, 2.0, 2.5).regular);
  }

  SUBCASE("degrees must be positive") {
    std::vector<int> deg(mesh.n_cells(), 0);
    CHECK_THROWS_AS(check_regularity(mesh, deg, 2.0, 2.0), std::invalid_argument);
  }
}

TEST_CASE("randomized refinement keeps the mesh one-irregular and area-exact") {
  Mesh mesh = make_l_shape_mesh(12);
  std::mt19937 rng(123);
  for (int round = 0; round < 6; ++round) {
    const auto active = mesh.active_cells();
    std::vector<int> marked;
    for (int c : active)
      if (rng() % 3 == 0) marked.push_back(c);
    mesh.refine(marked);
    CHECK(max_hanging_per_edge(mesh) <= 1);
    CHECK(mesh.total_active_area() == doctest::Approx(3.0).epsilon(1e-12));
  }
  CHECK(mesh.n_active_cells() > 100);
}
