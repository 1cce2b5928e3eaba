#include "hpstokes/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace hpstokes {

namespace {

std::pair<int, int> edge_key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

}  // namespace

int Mesh::n_active_cells() const {
  int n = 0;
  for (const Cell& c : cells_)
    if (c.active) ++n;
  return n;
}

std::vector<int> Mesh::active_cells() const {
  std::vector<int> ids;
  ids.reserve(cells_.size());
  for (int c = 0; c < n_cells(); ++c)
    if (cells_[c].active) ids.push_back(c);
  return ids;
}

std::array<Vec2, 4> Mesh::cell_corners(int c) const {
  const Cell& cell = cells_[c];
  return {vertices_[cell.v[0]], vertices_[cell.v[1]], vertices_[cell.v[2]], vertices_[cell.v[3]]};
}

double Mesh::cell_diameter(int c) const {
  const auto corners = cell_corners(c);
  double d = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) d = std::max(d, (corners[i] - corners[j]).norm());
  return d;
}

double Mesh::cell_area(int c) const {
  const auto v = cell_corners(c);
  double twice = 0.0;
  for (int i = 0; i < 4; ++i) {
    const Vec2& p = v[i];
    const Vec2& q = v[(i + 1) % 4];
    twice += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * twice;
}

double Mesh::face_length(int f) const {
  const Face& face = faces()[f];
  return (vertices_[face.v[1]] - vertices_[face.v[0]]).norm();
}

double Mesh::total_active_area() const {
  double area = 0.0;
  for (int c = 0; c < n_cells(); ++c)
    if (cells_[c].active) area += cell_area(c);
  return area;
}

int Mesh::add_vertex(const Vec2& p) {
  const auto key = std::make_pair(p.x(), p.y());
  auto it = vertex_index_.find(key);
  if (it != vertex_index_.end()) return it->second;
  const int id = n_vertices();
  vertices_.push_back(p);
  vertex_index_.emplace(key, id);
  return id;
}

int Mesh::add_cell(const std::array<int, 4>& corners, int level) {
  Cell cell;
  cell.v = corners;
  cell.level = level;
  cells_.push_back(cell);
  faces_valid_ = false;
  return n_cells() - 1;
}

const std::vector<Face>& Mesh::faces() const {
  if (!faces_valid_) build_faces();
  return faces_;
}

void Mesh::build_faces() const {
  faces_.clear();

  struct SideRef {
    int cell, side;
  };
  std::map<std::pair<int, int>, std::vector<SideRef>> edge_map;
  for (int c = 0; c < n_cells(); ++c) {
    if (!cells_[c].active) continue;
    for (int s = 0; s < 4; ++s) {
      const int a = cells_[c].v[s];
      const int b = cells_[c].v[(s + 1) % 4];
      edge_map[edge_key(a, b)].push_back({c, s});
    }
  }

  auto side_start = [&](const SideRef& r) { return cells_[r.cell].v[r.side]; };
  auto side_end = [&](const SideRef& r) { return cells_[r.cell].v[(r.side + 1) % 4]; };

  // Sub-edges claimed by a hanging parent, mapped to (parent cell ref, hanging vertex).
  std::map<std::pair<int, int>, std::pair<SideRef, int>> claimed;
  for (const auto& [key, sides] : edge_map) {
    if (sides.size() != 1) continue;
    const SideRef ref = sides.front();
    const int a = side_start(ref), b = side_end(ref);
    const Vec2 mid = 0.5 * (vertices_[a] + vertices_[b]);
    const auto mid_it = vertex_index_.find(std::make_pair(mid.x(), mid.y()));
    if (mid_it == vertex_index_.end()) continue;
    const int m = mid_it->second;
    const auto k1 = edge_key(a, m), k2 = edge_key(m, b);
    const auto it1 = edge_map.find(k1);
    const auto it2 = edge_map.find(k2);
    const bool sub1 = it1 != edge_map.end() && it1->second.size() == 1;
    const bool sub2 = it2 != edge_map.end() && it2->second.size() == 1;
    if (sub1 && sub2) {
      claimed.emplace(k1, std::make_pair(ref, m));
      claimed.emplace(k2, std::make_pair(ref, m));
    } else if (sub1 || sub2) {
      throw std::logic_error("Mesh::build_faces: half-matched hanging edge");
    }
  }

  // Coarse parent edges, keyed like their own (a,b) pair so the sub-face
  // pass can find them.
  std::map<std::pair<int, int>, int> parent_face_of;
  for (const auto& [key, sides] : edge_map) {
    if (sides.size() > 2) throw std::logic_error("Mesh::build_faces: more than two cells on an edge");
    if (sides.size() == 2) {
      const SideRef& ra = sides[0];
      const SideRef& rb = sides[1];
      Face face;
      face.kind = FaceKind::interior;
      face.v = {side_start(ra), side_end(ra)};
      face.cell_a = ra.cell;
      face.side_a = ra.side;
      face.cell_b = rb.cell;
      face.side_b = rb.side;
      face.ra0 = 0.0;
      face.ra1 = 1.0;
      const bool same_dir = side_start(rb) == face.v[0];
      face.rb0 = same_dir ? 0.0 : 1.0;
      face.rb1 = same_dir ? 1.0 : 0.0;
      faces_.push_back(face);
      continue;
    }
    const SideRef ref = sides.front();
    if (claimed.count(key)) continue;  // handled in the sub-face pass below
    const int a = side_start(ref), b = side_end(ref);
    const Vec2 mid = 0.5 * (vertices_[a] + vertices_[b]);
    const auto mid_it = vertex_index_.find(std::make_pair(mid.x(), mid.y()));
    bool is_parent = false;
    if (mid_it != vertex_index_.end()) {
      const int m = mid_it->second;
      is_parent = claimed.count(edge_key(a, m)) > 0 && claimed.count(edge_key(m, b)) > 0;
    }
    if (is_parent) {
      Face face;
      face.kind = FaceKind::hanging_parent;
      face.v = {a, b};
      face.cell_a = ref.cell;
      face.side_a = ref.side;
      face.hanging_vertex = mid_it->second;
      parent_face_of[key] = static_cast<int>(faces_.size());
      faces_.push_back(face);
    } else {
      Face face;
      face.kind = FaceKind::boundary;
      face.v = {a, b};
      face.cell_a = ref.cell;
      face.side_a = ref.side;
      face.boundary_tag = 0;
      faces_.push_back(face);
    }
  }

  // Sub-faces under hanging vertices.
  for (const auto& [key, claim] : claimed) {
    const SideRef& coarse = claim.first;
    const int m = claim.second;
    const SideRef fine = edge_map.at(key).front();
    Face face;
    face.kind = FaceKind::hanging_sub;
    face.v = {side_start(fine), side_end(fine)};
    face.cell_a = fine.cell;
    face.side_a = fine.side;
    face.cell_b = coarse.cell;
    face.side_b = coarse.side;
    face.ra0 = 0.0;
    face.ra1 = 1.0;
    // Coarse side traversal parameter of the fine endpoints: the coarse
    // corners sit at 0 and 1, the hanging vertex at 1/2.
    const int c0 = side_start(coarse), c1 = side_end(coarse);
    auto coarse_param = [&](int vid) {
      if (vid == c0) return 0.0;
      if (vid == c1) return 1.0;
      if (vid == m) return 0.5;
      throw std::logic_error("Mesh::build_faces: sub-face endpoint off the parent edge");
    };
    face.rb0 = coarse_param(face.v[0]);
    face.rb1 = coarse_param(face.v[1]);
    const int parent = parent_face_of.at(edge_key(c0, c1));
    face.parent = parent;
    const int id = static_cast<int>(faces_.size());
    Face& pf = faces_[parent];
    if (pf.subs[0] < 0)
      pf.subs[0] = id;
    else
      pf.subs[1] = id;
    faces_.push_back(face);
  }

  faces_valid_ = true;
}

std::vector<int> Mesh::cell_faces(int c) const {
  std::vector<int> result;
  const auto& fs = faces();
  for (int f = 0; f < static_cast<int>(fs.size()); ++f) {
    if (fs[f].kind == FaceKind::hanging_parent) continue;
    if (fs[f].cell_a == c || fs[f].cell_b == c) result.push_back(f);
  }
  return result;
}

std::vector<int> Mesh::cell_patch(int c) const {
  if (c < 0 || c >= n_cells() || !cells_[c].active)
    throw std::invalid_argument("Mesh::cell_patch: cell is not active");
  std::set<int> patch{c};
  for (const Face& f : faces()) {
    if (!f.integrable_interior()) continue;
    if (f.cell_a == c) patch.insert(f.cell_b);
    if (f.cell_b == c) patch.insert(f.cell_a);
  }
  return {patch.begin(), patch.end()};
}

std::vector<int> Mesh::face_patch(int f) const {
  const Face& face = faces()[f];
  if (!face.integrable_interior())
    throw std::invalid_argument("Mesh::face_patch: face is not an interior face");
  std::vector<int> cells{face.cell_a, face.cell_b};
  std::sort(cells.begin(), cells.end());
  return cells;
}

std::vector<int> Mesh::edge_neighbors(int c) const {
  std::vector<int> patch = cell_patch(c);
  patch.erase(std::remove(patch.begin(), patch.end(), c), patch.end());
  return patch;
}

std::vector<std::pair<int, int>> Mesh::adjacent_pairs() const {
  std::set<std::pair<int, int>> pairs;
  std::map<int, std::vector<int>> cells_at_vertex;
  for (int c = 0; c < n_cells(); ++c) {
    if (!cells_[c].active) continue;
    for (int k = 0; k < 4; ++k) cells_at_vertex[cells_[c].v[k]].push_back(c);
  }
  for (const auto& [v, cells] : cells_at_vertex) {
    for (size_t i = 0; i < cells.size(); ++i)
      for (size_t j = i + 1; j < cells.size(); ++j)
        pairs.emplace(std::min(cells[i], cells[j]), std::max(cells[i], cells[j]));
  }
  // Hanging contacts: the fine cell's corner is not a corner of the coarse
  // cell, so the vertex scan above misses those pairs.
  for (const Face& f : faces()) {
    if (f.kind != FaceKind::hanging_sub) continue;
    pairs.emplace(std::min(f.cell_a, f.cell_b), std::max(f.cell_a, f.cell_b));
  }
  return {pairs.begin(), pairs.end()};
}

void Mesh::refine(const std::vector<int>& marked) {
  for (int c : marked) {
    if (c < 0 || c >= n_cells()) throw std::invalid_argument("Mesh::refine: invalid cell id");
    if (!cells_[c].active) continue;  // re-marking refined parents is a no-op
    refine_one(c);
  }
}

void Mesh::refine_one(int c) {
  if (!cells_[c].active) return;
  // One-irregular closure: coarser edge neighbors must split first.
  for (int guard = 0;; ++guard) {
    if (guard > 64) throw std::logic_error("Mesh::refine_one: closure did not terminate");
    std::vector<int> deficit;
    for (int n : edge_neighbors(c))
      if (cells_[n].level < cells_[c].level) deficit.push_back(n);
    if (deficit.empty()) break;
    for (int n : deficit) refine_one(n);
  }
  split(c);
}

void Mesh::split(int c) {
  const Cell cell = cells_[c];
  const auto corners = cell_corners(c);
  const int m01 = add_vertex(0.5 * (corners[0] + corners[1]));
  const int m12 = add_vertex(0.5 * (corners[1] + corners[2]));
  const int m23 = add_vertex(0.5 * (corners[2] + corners[3]));
  const int m30 = add_vertex(0.5 * (corners[3] + corners[0]));
  const int mid = add_vertex(0.25 * (corners[0] + corners[1] + corners[2] + corners[3]));

  const int level = cell.level + 1;
  const std::array<std::array<int, 4>, 4> kids = {{
      {cell.v[0], m01, mid, m30},  // (0,0) quarter
      {m01, cell.v[1], m12, mid},  // (1,0) quarter
      {mid, m12, cell.v[2], m23},  // (1,1) quarter
      {m30, mid, m23, cell.v[3]},  // (0,1) quarter
  }};
  for (int k = 0; k < 4; ++k) {
    const int id = add_cell(kids[k], level);
    cells_[id].parent = c;
    cells_[c].children[k] = id;
  }
  cells_[c].active = false;
  faces_valid_ = false;
}

Mesh make_l_shape_mesh(int n_initial) {
  int k = 0;
  int n = 3;
  while (n < n_initial) {
    n *= 4;
    ++k;
  }
  if (n != n_initial)
    throw std::invalid_argument("make_l_shape_mesh: n_initial must be of the form 3*4^k");

  const int per_side = 2 << k;  // 2^(k+1) squares across [-1,1]
  const double h = 2.0 / per_side;
  Mesh mesh;
  for (int j = 0; j < per_side; ++j) {
    for (int i = 0; i < per_side; ++i) {
      const double x0 = -1.0 + i * h;
      const double y0 = -1.0 + j * h;
      const double cx = x0 + 0.5 * h;
      const double cy = y0 + 0.5 * h;
      if (cx > 0.0 && cy < 0.0) continue;  // the removed quadrant [0,1]x[-1,0]
      const int v0 = mesh.add_vertex(Vec2(x0, y0));
      const int v1 = mesh.add_vertex(Vec2(x0 + h, y0));
      const int v2 = mesh.add_vertex(Vec2(x0 + h, y0 + h));
      const int v3 = mesh.add_vertex(Vec2(x0, y0 + h));
      mesh.add_cell({v0, v1, v2, v3}, 0);
    }
  }
  return mesh;
}

RegularityReport check_regularity(const Mesh& mesh, const std::vector<int>& degrees,
                                  double gamma_h, double gamma_p) {
  for (int c : mesh.active_cells())
    if (degrees[c] < 1) throw std::invalid_argument("check_regularity: degrees must be positive");
  RegularityReport report;
  const double tol = 1.0 + 1e-10;
  for (const auto& [a, b] : mesh.adjacent_pairs()) {
    const double ha = mesh.cell_diameter(a), hb = mesh.cell_diameter(b);
    const double pa = degrees[a], pb = degrees[b];
    RegularityViolation v;
    v.cell_a = a;
    v.cell_b = b;
    v.h_violation = hb > gamma_h * ha * tol || hb * tol < ha / gamma_h;
    v.p_violation = pb > gamma_p * pa * tol || pb * tol < pa / gamma_p;
    if (v.h_violation || v.p_violation) {
      report.regular = false;
      report.violations.push_back(v);
    }
  }
  return report;
}

}  // namespace hpstokes
