#include "hpstokes/adaptivity.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/SparseCholesky>

#include "hpstokes/lagrange.hpp"
#include "hpstokes/quadrature.hpp"

namespace hpstokes {

namespace {

constexpr std::array<std::array<double, 2>, 4> kQuarterOffset = {
    {{0.0, 0.0}, {0.5, 0.0}, {0.5, 0.5}, {0.0, 0.5}}};

VectorField zero_field() {
  return [](const Vec2&) { return Vec2(0.0, 0.0); };
}

}  // namespace

PatchSpace build_patch_space(const HpSpace& global, int cell, Pattern pattern) {
  const Mesh& gmesh = global.mesh();
  PatchSpace patch;

  const std::vector<int> members = gmesh.cell_patch(cell);
  std::map<int, int> local_of_global;
  for (int g : members) {
    std::array<int, 4> corners;
    for (int k = 0; k < 4; ++k) corners[k] = patch.mesh.add_vertex(gmesh.vertex(gmesh.cell(g).v[k]));
    // Keep the relative refinement depths so pre-existing hanging vertices
    // inside the patch are detected.
    const int id = patch.mesh.add_cell(corners, gmesh.cell(g).level);
    local_of_global[g] = id;
  }

  const int extra = pattern == Pattern::p ? 1 : 0;
  patch.degrees.assign(members.size(), 0);
  patch.origin.resize(members.size());
  for (int g : members) {
    const int l = local_of_global.at(g);
    patch.degrees[l] = global.velocity_degree(g) + extra;
    patch.origin[l] = PatchSpace::Origin{g, Vec2::Zero(), 1.0};
  }

  if (pattern == Pattern::h) {
    patch.mesh.refine(patch.mesh.active_cells());
    patch.degrees.resize(patch.mesh.n_cells(), 0);
    patch.origin.resize(patch.mesh.n_cells());
    for (int c : patch.mesh.active_cells()) {
      if (patch.degrees[c] > 0) continue;
      const Cell& child = patch.mesh.cell(c);
      int quarter = 0;
      for (int k = 0; k < 4; ++k)
        if (patch.mesh.cell(child.parent).children[k] == c) quarter = k;
      const PatchSpace::Origin& parent = patch.origin[child.parent];
      patch.degrees[c] = patch.degrees[child.parent];
      patch.origin[c] = PatchSpace::Origin{
          parent.global_cell,
          parent.offset + parent.scale * Vec2(kQuarterOffset[quarter][0], kQuarterOffset[quarter][1]),
          0.5 * parent.scale};
    }
  }

  patch.space = std::make_unique<HpSpace>(patch.mesh, patch.degrees);
  patch.constraints = build_constraints(*patch.space, {0}, zero_field());
  return patch;
}

RitzSystem assemble_ritz(const PatchSpace& patch, const StokesSolution& solution,
                         const StokesProblem& problem) {
  const HpSpace& space = *patch.space;
  const HpSpace& gspace = *solution.space;
  const ConstraintSet& cs = patch.constraints;
  const double nu = problem.viscosity;

  RitzSystem system;
  system.rhs = Eigen::VectorXd::Zero(cs.n_free());
  std::vector<Eigen::Triplet<double>> triplets;

  auto scatter_matrix = [&](int row, int col, double a) {
    if (a == 0.0) return;
    const auto& r = cs.expansion(row);
    const auto& c = cs.expansion(col);
    for (const auto& [ri, rc] : r.terms)
      for (const auto& [ci, cc] : c.terms) triplets.emplace_back(ri, ci, rc * cc * a);
  };
  auto scatter_vector = [&](int row, double v) {
    if (v == 0.0) return;
    for (const auto& [ri, rc] : cs.expansion(row).terms) system.rhs[ri] += rc * v;
  };

  for (int cell : patch.mesh.active_cells()) {
    const int pv = space.velocity_degree(cell);
    const int pp = space.pressure_degree(cell);
    const PatchSpace::Origin& origin = patch.origin[cell];
    const int pg = gspace.velocity_degree(origin.global_cell);
    const int n1d = std::max(pv, pg) + 2;
    const Quadrature2D& rule = gauss_legendre_2d(n1d);
    const BasisTable& vt = basis_table(pv, n1d);
    const BasisTable& pt = basis_table(pp, n1d);
    const BilinearMap map = patch.mesh.cell_map(cell);

    const int nv = vt.n_basis;
    const int np = pt.n_basis;
    Eigen::MatrixXd stiff = Eigen::MatrixXd::Zero(nv, nv);
    Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(np, np);
    Eigen::MatrixXd load_v = Eigen::MatrixXd::Zero(nv, 2);
    Eigen::VectorXd load_p = Eigen::VectorXd::Zero(np);

    std::vector<Vec2> vgrad(nv);
    for (int q = 0; q < rule.size(); ++q) {
      const Vec2& xq = rule.points[q];
      const double jw = map.jacobian_det(xq) * rule.weights[q];
      const Vec2 x = map.to_physical(xq);
      for (int b = 0; b < nv; ++b)
        vgrad[b] = map.push_gradient(xq, Vec2(vt.gx(q, b), vt.gy(q, b)));

      for (int i = 0; i < nv; ++i)
        for (int j = i; j < nv; ++j) {
          const double a = jw * vgrad[i].dot(vgrad[j]);
          stiff(i, j) += a;
          if (i != j) stiff(j, i) += a;
        }
      for (int i = 0; i < np; ++i)
        for (int j = i; j < np; ++j) {
          const double a = jw * pt.v(q, i) * pt.v(q, j);
          mass(i, j) += a;
          if (i != j) mass(j, i) += a;
        }

      // Residual data from the global solution:
      //   (f, v) - nu (grad v, grad u_FE) + (div v, rho_FE) + (q, div u_FE).
      const Vec2 gref = origin.offset + origin.scale * xq;
      const Eigen::Matrix2d gu =
          velocity_gradient(gspace, solution.coefficients, origin.global_cell, gref);
      const double rho = pressure_value(gspace, solution.coefficients, origin.global_cell, gref);
      const double div_u = gu.trace();
      const Vec2 f = problem.body_force ? problem.body_force(x) : Vec2(0.0, 0.0);
      for (int i = 0; i < nv; ++i) {
        const double vi = vt.v(q, i);
        load_v(i, 0) += jw * (vi * f.x() - nu * vgrad[i].dot(gu.row(0)) + vgrad[i].x() * rho);
        load_v(i, 1) += jw * (vi * f.y() - nu * vgrad[i].dot(gu.row(1)) + vgrad[i].y() * rho);
      }
      for (int k = 0; k < np; ++k) load_p(k) += jw * pt.v(q, k) * div_u;
    }

    const auto& vdofs = space.velocity_layout().cell_dofs[cell];
    const auto& pdofs = space.pressure_layout().cell_dofs[cell];
    for (int i = 0; i < nv; ++i) {
      for (int comp = 0; comp < 2; ++comp) {
        const int gi = space.velocity_global(comp, vdofs[i]);
        for (int j = 0; j < nv; ++j)
          scatter_matrix(gi, space.velocity_global(comp, vdofs[j]), stiff(i, j));
        scatter_vector(gi, load_v(i, comp));
      }
    }
    for (int i = 0; i < np; ++i) {
      const int gi = space.pressure_global(pdofs[i]);
      for (int j = 0; j < np; ++j)
        scatter_matrix(gi, space.pressure_global(pdofs[j]), mass(i, j));
      scatter_vector(gi, load_p(i));
    }
  }

  system.matrix.resize(cs.n_free(), cs.n_free());
  system.matrix.setFromTriplets(triplets.begin(), triplets.end());
  system.matrix.makeCompressed();
  return system;
}

RitzResult local_ritz(const StokesSolution& solution, const StokesProblem& problem, int cell,
                      Pattern pattern) {
  const PatchSpace patch = build_patch_space(*solution.space, cell, pattern);
  const RitzSystem system = assemble_ritz(patch, solution, problem);

  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(system.matrix);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("local_ritz: patch factorization failed");
  const Eigen::VectorXd w = llt.solve(system.rhs);

  RitzResult result;
  // x^T A x = x^T b is exactly ||grad w_u||^2 + ||w_rho||^2 (homogeneous
  // constraints, Gram matrix of the Ritz inner product).
  result.norm_sq = std::max(0.0, w.dot(system.rhs));
  result.workload = patch.constraints.n_free();
  return result;
}

double convergence_indicator(const StokesSolution& solution, const StokesProblem& problem,
                             int cell, Pattern pattern, double eta_cell) {
  if (eta_cell == 0.0) return 0.0;
  return std::sqrt(local_ritz(solution, problem, cell, pattern).norm_sq) / eta_cell;
}

int workload(const HpSpace& space, int cell, Pattern pattern) {
  return build_patch_space(space, cell, pattern).constraints.n_free();
}

Pattern choose_pattern(double k_h, double k_p, int workload_h, int workload_p) {
  return k_p / workload_p >= k_h / workload_h ? Pattern::p : Pattern::h;
}

RefinementPlan doerfler_mark(const EstimatorReport& report,
                             const std::vector<CellDecision>& decisions, double theta) {
  if (report.active.empty()) throw std::invalid_argument("doerfler_mark: empty mesh");
  if (!(theta > 0.0 && theta < 1.0))
    throw std::invalid_argument("doerfler_mark: theta must be in (0,1)");

  RefinementPlan plan;
  plan.decisions = decisions;
  std::sort(plan.decisions.begin(), plan.decisions.end(),
            [](const CellDecision& a, const CellDecision& b) { return a.cell < b.cell; });

  double eta_sq = 0.0;
  for (int c : report.active) eta_sq += report.eta_cell[c] * report.eta_cell[c];
  plan.threshold = theta * theta * eta_sq;
  if (eta_sq == 0.0) return plan;  // fully resolved, nothing to mark

  struct Weighted {
    double weight;
    int cell;
  };
  std::vector<Weighted> order;
  order.reserve(plan.decisions.size());
  for (const CellDecision& d : plan.decisions) {
    const double eta_k = report.eta_cell[d.cell];
    order.push_back({d.k_selected * d.k_selected * eta_k * eta_k, d.cell});
  }
  std::sort(order.begin(), order.end(), [](const Weighted& a, const Weighted& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.cell < b.cell;
  });

  double sum = 0.0;
  double previous_sum = 0.0;
  for (const Weighted& w : order) {
    previous_sum = sum;
    sum += w.weight;
    plan.marked.push_back(w.cell);
    if (sum >= plan.threshold) break;
  }
  plan.marked_sum = sum;
  if (sum < plan.threshold) {
    plan.fallback = true;  // even the full set misses the bound; mark all
    plan.minimality = true;
  } else {
    plan.minimality = previous_sum < plan.threshold;
  }
  return plan;
}

void apply_plan(Mesh& mesh, std::vector<int>& degrees, const RefinementPlan& plan,
                double gamma_p) {
  std::map<int, Pattern> chosen;
  for (const CellDecision& d : plan.decisions) chosen[d.cell] = d.chosen;

  std::vector<int> h_cells, p_cells;
  for (int c : plan.marked) {
    if (chosen.at(c) == Pattern::h)
      h_cells.push_back(c);
    else
      p_cells.push_back(c);
  }
  std::sort(h_cells.begin(), h_cells.end());
  std::sort(p_cells.begin(), p_cells.end());

  for (int c : p_cells) degrees[c] += 1;
  mesh.refine(h_cells);
  degrees.resize(mesh.n_cells(), 0);
  for (int c : mesh.active_cells()) {
    if (degrees[c] > 0) continue;
    int ancestor = mesh.cell(c).parent;
    while (degrees[ancestor] == 0) ancestor = mesh.cell(ancestor).parent;
    degrees[c] = degrees[ancestor];
  }

  // Smooth degrees upward until gamma_p-regularity holds.
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& [a, b] : mesh.adjacent_pairs()) {
      const int lo = std::min(degrees[a], degrees[b]);
      const int hi = std::max(degrees[a], degrees[b]);
      if (hi > gamma_p * lo * (1.0 + 1e-12)) {
        const int target = static_cast<int>(std::ceil(hi / gamma_p - 1e-12));
        if (degrees[a] == lo)
          degrees[a] = target;
        else
          degrees[b] = target;
        changed = true;
      }
    }
  }
}

}  // namespace hpstokes
