#include "hpstokes/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "hpstokes/lagrange.hpp"
#include "hpstokes/quadrature.hpp"

namespace hpstokes {

namespace {

double dist_point_segment(const Vec2& x, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  double t = len2 > 0.0 ? (x - a).dot(d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (x - (a + t * d)).norm();
}

double pow_weight(double phi, double exponent) {
  if (exponent == 0.0) return 1.0;
  return std::pow(std::max(phi, 0.0), exponent);
}

// Boundary segments of the two-cell patch omega_f: all cell edges except
// the face itself; an edge strictly containing the face (the coarse side of
// a hanging sub-face) contributes its remaining piece.
struct PatchBoundary {
  std::vector<std::pair<Vec2, Vec2>> segments;
  double diameter = 0.0;

  double distance(const Vec2& x) const {
    double d = std::numeric_limits<double>::max();
    for (const auto& [a, b] : segments) d = std::min(d, dist_point_segment(x, a, b));
    return d;
  }
};

PatchBoundary face_patch_boundary(const Mesh& mesh, int face_id) {
  const Face& face = mesh.face(face_id);
  const Vec2 fa = mesh.vertex(face.v[0]);
  const Vec2 fb = mesh.vertex(face.v[1]);
  const double scale = (fb - fa).norm();

  auto on_segment = [&](const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 d = b - a;
    const double cross = d.x() * (p - a).y() - d.y() * (p - a).x();
    if (std::abs(cross) > 1e-12 * scale * scale) return false;
    const double t = (p - a).dot(d) / d.squaredNorm();
    return t > -1e-12 && t < 1.0 + 1e-12;
  };

  PatchBoundary patch;
  const std::array<int, 2> cells = {face.cell_a, face.cell_b};
  std::vector<Vec2> corners;
  for (int c : cells) {
    const auto cc = mesh.cell_corners(c);
    corners.insert(corners.end(), cc.begin(), cc.end());
    for (int s = 0; s < 4; ++s) {
      const Vec2 a = cc[s];
      const Vec2 b = cc[(s + 1) % 4];
      const bool fa_on = on_segment(fa, a, b);
      const bool fb_on = on_segment(fb, a, b);
      if (!(fa_on && fb_on)) {
        patch.segments.emplace_back(a, b);
        continue;
      }
      // The edge contains the face; keep the pieces outside it.
      const Vec2 d = b - a;
      const double len2 = d.squaredNorm();
      double t0 = (fa - a).dot(d) / len2;
      double t1 = (fb - a).dot(d) / len2;
      if (t0 > t1) std::swap(t0, t1);
      if (t0 > 1e-12) patch.segments.emplace_back(a, a + t0 * d);
      if (t1 < 1.0 - 1e-12) patch.segments.emplace_back(a + t1 * d, b);
    }
  }
  for (size_t i = 0; i < corners.size(); ++i)
    for (size_t j = i + 1; j < corners.size(); ++j)
      patch.diameter = std::max(patch.diameter, (corners[i] - corners[j]).norm());
  return patch;
}

// Integral over an interior face of |[nu du/dn]|^2 Phi_{omega_f}^alpha.
double face_jump_integral(const StokesSolution& solution, const StokesProblem& problem,
                          int face_id, double alpha) {
  const HpSpace& space = *solution.space;
  const Mesh& mesh = space.mesh();
  const Face& face = mesh.face(face_id);
  const Vec2 fa = mesh.vertex(face.v[0]);
  const Vec2 fb = mesh.vertex(face.v[1]);
  const double len = (fb - fa).norm();

  const int pf = std::max(space.velocity_degree(face.cell_a), space.velocity_degree(face.cell_b));
  const Quadrature1D rule = gauss_legendre(pf + 3);
  const PatchBoundary patch = face_patch_boundary(mesh, face_id);

  // Outward normal of cell_a: its side traverses the edge counterclockwise,
  // so the normal is the traversal direction rotated clockwise.
  const Vec2 ta = ((face.ra1 - face.ra0) > 0 ? (fb - fa) : (fa - fb)).normalized();
  const Vec2 normal(ta.y(), -ta.x());

  double integral = 0.0;
  for (int q = 0; q < rule.size(); ++q) {
    const double t = rule.points[q];
    const Vec2 x = fa + t * (fb - fa);
    const Vec2 ref_a = side_reference_point(face.side_a, face.ra0 + (face.ra1 - face.ra0) * t);
    const Vec2 ref_b = side_reference_point(face.side_b, face.rb0 + (face.rb1 - face.rb0) * t);
    const Eigen::Matrix2d ga = velocity_gradient(space, solution.coefficients, face.cell_a, ref_a);
    const Eigen::Matrix2d gb = velocity_gradient(space, solution.coefficients, face.cell_b, ref_b);
    const Vec2 jump = problem.viscosity * (ga - gb) * normal;
    const double phi = patch.distance(x) / patch.diameter;
    integral += rule.weights[q] * len * jump.squaredNorm() * pow_weight(phi, alpha);
  }
  return integral;
}

}  // namespace

double weight_cell(const Mesh& mesh, int cell, const Vec2& x) {
  const auto corners = mesh.cell_corners(cell);
  double d = std::numeric_limits<double>::max();
  for (int s = 0; s < 4; ++s)
    d = std::min(d, dist_point_segment(x, corners[s], corners[(s + 1) % 4]));
  return d / mesh.cell_diameter(cell);
}

double weight_face_patch(const Mesh& mesh, int face, const Vec2& x) {
  if (!mesh.face(face).integrable_interior())
    throw std::invalid_argument("weight_face_patch: face is not an interior face");
  const PatchBoundary patch = face_patch_boundary(mesh, face);
  return patch.distance(x) / patch.diameter;
}

Eigen::MatrixXd project_rhs(const Mesh& mesh, int cell, int degree, const VectorField& f) {
  const int n1d = degree + 3;
  const Quadrature2D& rule = gauss_legendre_2d(n1d);
  const BasisTable& table = basis_table(degree, n1d);
  const BilinearMap map = mesh.cell_map(cell);
  const int nb = table.n_basis;
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(nb, nb);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nb, 2);
  for (int q = 0; q < rule.size(); ++q) {
    const double jw = map.jacobian_det(rule.points[q]) * rule.weights[q];
    const Vec2 fx = f ? f(map.to_physical(rule.points[q])) : Vec2(0.0, 0.0);
    for (int i = 0; i < nb; ++i) {
      const double vi = table.v(q, i);
      rhs(i, 0) += jw * vi * fx.x();
      rhs(i, 1) += jw * vi * fx.y();
      for (int j = i; j < nb; ++j) {
        mass(i, j) += jw * vi * table.v(q, j);
        if (j != i) mass(j, i) = mass(i, j);
      }
    }
  }
  return mass.ldlt().solve(rhs);
}

CellTerms cell_terms(const StokesSolution& solution, const StokesProblem& problem, int cell,
                     double alpha) {
  const HpSpace& space = *solution.space;
  const Mesh& mesh = space.mesh();
  const int pv = space.velocity_degree(cell);
  const int pp = space.pressure_degree(cell);
  const double h = mesh.cell_diameter(cell);
  const double nu = problem.viscosity;

  const Eigen::MatrixXd f_proj = project_rhs(mesh, cell, pv, problem.body_force);

  const int n1d = 2 * pv + 4;
  const Quadrature2D& rule = gauss_legendre_2d(n1d);
  const BasisTable& vt = basis_table(pv, n1d);
  const BasisTable& pt = basis_table(pp, n1d);
  const BilinearMap map = mesh.cell_map(cell);
  const auto& vdofs = space.velocity_layout().cell_dofs[cell];
  const auto& pdofs = space.pressure_layout().cell_dofs[cell];

  double r1_sq = 0.0, r2_sq = 0.0, osc_sq = 0.0;
  for (int q = 0; q < rule.size(); ++q) {
    const Vec2& xq = rule.points[q];
    const double jw = map.jacobian_det(xq) * rule.weights[q];
    const Vec2 x = map.to_physical(xq);

    Vec2 lap = Vec2::Zero(), grad_p = Vec2::Zero(), f_poly = Vec2::Zero();
    double div = 0.0;
    for (int bI = 0; bI < vt.n_basis; ++bI) {
      const Vec2 rg(vt.gx(q, bI), vt.gy(q, bI));
      const Vec2 pg = map.push_gradient(xq, rg);
      const Hess2 hh = map.push_hessian(xq, rg, Hess2{vt.hxx(q, bI), vt.hxy(q, bI), vt.hyy(q, bI)});
      const double tr = hh.xx + hh.yy;
      const double cx = solution.coefficients[space.velocity_global(0, vdofs[bI])];
      const double cy = solution.coefficients[space.velocity_global(1, vdofs[bI])];
      lap.x() += cx * tr;
      lap.y() += cy * tr;
      div += cx * pg.x() + cy * pg.y();
      f_poly.x() += f_proj(bI, 0) * vt.v(q, bI);
      f_poly.y() += f_proj(bI, 1) * vt.v(q, bI);
    }
    for (int bI = 0; bI < pt.n_basis; ++bI) {
      const Vec2 pg = map.push_gradient(xq, Vec2(pt.gx(q, bI), pt.gy(q, bI)));
      grad_p += solution.coefficients[space.pressure_global(pdofs[bI])] * pg;
    }

    const double phi_a = pow_weight(weight_cell(mesh, cell, x), alpha);
    const Vec2 residual = f_poly + nu * lap - grad_p;
    r1_sq += jw * residual.squaredNorm() * phi_a;
    r2_sq += jw * div * div * phi_a;
    const Vec2 f_exact = problem.body_force ? problem.body_force(x) : Vec2(0.0, 0.0);
    osc_sq += jw * (f_exact - f_poly).squaredNorm();
  }

  CellTerms terms;
  terms.r1 = (h / pv) * std::sqrt(r1_sq);
  terms.r2 = std::sqrt(r2_sq);
  terms.osc = (h / pv) * std::sqrt(osc_sq);
  return terms;
}

double face_term(const StokesSolution& solution, const StokesProblem& problem, int cell,
                 double alpha) {
  const Mesh& mesh = solution.space->mesh();
  double b_sq = 0.0;
  for (int f : mesh.cell_faces(cell)) {
    const Face& face = mesh.face(f);
    if (!face.integrable_interior()) continue;
    const int pf = std::max(solution.space->velocity_degree(face.cell_a),
                            solution.space->velocity_degree(face.cell_b));
    const double hf = mesh.face_length(f);
    b_sq += hf / (2.0 * pf) * face_jump_integral(solution, problem, f, alpha);
  }
  return std::sqrt(b_sq);
}

EstimatorReport estimate(const StokesSolution& solution, const StokesProblem& problem,
                         double alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("estimate: alpha must be in [0,1]");
  const HpSpace& space = *solution.space;
  const Mesh& mesh = space.mesh();

  EstimatorReport report;
  report.alpha = alpha;
  report.active = mesh.active_cells();
  const int n = mesh.n_cells();
  report.r1.assign(n, 0.0);
  report.r2.assign(n, 0.0);
  report.b.assign(n, 0.0);
  report.osc.assign(n, 0.0);
  report.eta_cell.assign(n, 0.0);

  for (int cell : report.active) {
    const CellTerms terms = cell_terms(solution, problem, cell, alpha);
    report.r1[cell] = terms.r1;
    report.r2[cell] = terms.r2;
    report.osc[cell] = terms.osc;
  }

  // One pass over interior faces; each face feeds both adjacent cells with
  // the 1/2 factor, which the double visit cancels globally.
  std::vector<double> b_sq(n, 0.0);
  const auto& faces = mesh.faces();
  for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
    const Face& face = faces[f];
    if (!face.integrable_interior()) continue;
    const int pf =
        std::max(space.velocity_degree(face.cell_a), space.velocity_degree(face.cell_b));
    const double contribution =
        mesh.face_length(f) / (2.0 * pf) * face_jump_integral(solution, problem, f, alpha);
    b_sq[face.cell_a] += contribution;
    b_sq[face.cell_b] += contribution;
  }

  double eta_sq = 0.0;
  for (int cell : report.active) {
    report.b[cell] = std::sqrt(b_sq[cell]);
    const double cell_sq = report.r1[cell] * report.r1[cell] + report.r2[cell] * report.r2[cell] +
                           b_sq[cell];
    report.eta_cell[cell] = std::sqrt(cell_sq);
    eta_sq += cell_sq;
  }
  report.eta = std::sqrt(eta_sq);
  return report;
}

double effectivity(const EstimatorReport& report, double e_u, double e_p) {
  const double err = std::sqrt(e_u * e_u + e_p * e_p);
  if (err == 0.0) throw std::invalid_argument("effectivity: exact error is zero");
  return report.eta / err;
}

}  // namespace hpstokes
