#include "hpstokes/stokes.hpp"

#include <Eigen/SparseLU>

#include "hpstokes/lagrange.hpp"
#include "hpstokes/quadrature.hpp"

namespace hpstokes {

namespace {

// Scatters a local contribution into the reduced triplet list through the
// constraint expansions, moving inhomogeneities to the right-hand side.
struct Scatterer {
  const ConstraintSet& cs;
  std::vector<Eigen::Triplet<double>>& triplets;
  Eigen::VectorXd& rhs;

  void matrix(int row_full, int col_full, double a) const {
    if (a == 0.0) return;
    const auto& row = cs.expansion(row_full);
    const auto& col = cs.expansion(col_full);
    for (const auto& [r, cr] : row.terms) {
      for (const auto& [c, cc] : col.terms) triplets.emplace_back(r, c, cr * cc * a);
      if (col.inhomogeneity != 0.0) rhs[r] -= cr * a * col.inhomogeneity;
    }
  }
  void vector(int row_full, double v) const {
    if (v == 0.0) return;
    for (const auto& [r, cr] : cs.expansion(row_full).terms) rhs[r] += cr * v;
  }
};

}  // namespace

AssembledSystem assemble(const HpSpace& space, const ConstraintSet& constraints,
                         const StokesProblem& problem) {
  const Mesh& mesh = space.mesh();
  const double nu = problem.viscosity;

  AssembledSystem system;
  system.rhs = Eigen::VectorXd::Zero(constraints.n_free());
  std::vector<Eigen::Triplet<double>> triplets;
  Scatterer scatter{constraints, triplets, system.rhs};

  for (int cell : mesh.active_cells()) {
    const int pv = space.velocity_degree(cell);
    const int pp = space.pressure_degree(cell);
    const int n1d = pv + 2;
    const Quadrature2D& rule = gauss_legendre_2d(n1d);
    const BasisTable& vt = basis_table(pv, n1d);
    const BasisTable& pt = basis_table(pp, n1d);
    const BilinearMap map = mesh.cell_map(cell);

    const int nv = vt.n_basis;
    const int np = pt.n_basis;
    Eigen::MatrixXd stiff = Eigen::MatrixXd::Zero(nv, nv);
    Eigen::MatrixXd div_x = Eigen::MatrixXd::Zero(np, nv);
    Eigen::MatrixXd div_y = Eigen::MatrixXd::Zero(np, nv);
    Eigen::MatrixXd load = Eigen::MatrixXd::Zero(nv, 2);

    std::vector<Vec2> vgrad(nv);
    for (int q = 0; q < rule.size(); ++q) {
      const Vec2& xq = rule.points[q];
      const double det = map.jacobian_det(xq);
      if (!(det > 0.0))
        throw std::runtime_error("assemble: singular cell map on cell " + std::to_string(cell));
      const double jw = det * rule.weights[q];
      for (int b = 0; b < nv; ++b)
        vgrad[b] = map.push_gradient(xq, Vec2(vt.gx(q, b), vt.gy(q, b)));
      for (int i = 0; i < nv; ++i) {
        for (int j = i; j < nv; ++j) {
          const double a = nu * jw * vgrad[i].dot(vgrad[j]);
          stiff(i, j) += a;
          if (i != j) stiff(j, i) += a;
        }
      }
      for (int k = 0; k < np; ++k) {
        const double pk = pt.v(q, k) * jw;
        for (int i = 0; i < nv; ++i) {
          div_x(k, i) += pk * vgrad[i].x();
          div_y(k, i) += pk * vgrad[i].y();
        }
      }
      if (problem.body_force) {
        const Vec2 f = problem.body_force(map.to_physical(xq));
        if (f.squaredNorm() != 0.0)
          for (int i = 0; i < nv; ++i) {
            load(i, 0) += jw * vt.v(q, i) * f.x();
            load(i, 1) += jw * vt.v(q, i) * f.y();
          }
      }
    }

    const auto& vdofs = space.velocity_layout().cell_dofs[cell];
    const auto& pdofs = space.pressure_layout().cell_dofs[cell];
    for (int i = 0; i < nv; ++i) {
      for (int comp = 0; comp < 2; ++comp) {
        const int gi = space.velocity_global(comp, vdofs[i]);
        for (int j = 0; j < nv; ++j)
          scatter.matrix(gi, space.velocity_global(comp, vdofs[j]), stiff(i, j));
        scatter.vector(gi, load(i, comp));
      }
    }
    for (int k = 0; k < np; ++k) {
      const int gk = space.pressure_global(pdofs[k]);
      for (int i = 0; i < nv; ++i) {
        const int gx = space.velocity_global(0, vdofs[i]);
        const int gy = space.velocity_global(1, vdofs[i]);
        scatter.matrix(gx, gk, -div_x(k, i));
        scatter.matrix(gk, gx, -div_x(k, i));
        scatter.matrix(gy, gk, -div_y(k, i));
        scatter.matrix(gk, gy, -div_y(k, i));
      }
    }
  }

  system.matrix.resize(constraints.n_free(), constraints.n_free());
  system.matrix.setFromTriplets(triplets.begin(), triplets.end());
  system.matrix.makeCompressed();
  return system;
}

StokesSolution solve(const HpSpace& space, const ConstraintSet& constraints,
                     const AssembledSystem& system) {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(system.matrix);
  lu.factorize(system.matrix);
  if (lu.info() != Eigen::Success)
    throw SolverError("solve: sparse LU factorization failed", std::nan(""));
  Eigen::VectorXd x = lu.solve(system.rhs);
  // One step of iterative refinement.
  x += lu.solve(system.rhs - system.matrix * x);

  const double rhs_norm = system.rhs.norm();
  const double residual = (system.matrix * x - system.rhs).norm();
  const double rel = rhs_norm > 0.0 ? residual / rhs_norm : residual;
  if (!(rel <= 1e-10))
    throw SolverError("solve: relative residual " + std::to_string(rel) + " exceeds 1e-10", rel);

  StokesSolution solution;
  solution.space = &space;
  solution.constraints = &constraints;
  solution.coefficients = constraints.expand(x);
  return solution;
}

std::pair<std::vector<double>, std::vector<double>> energy_error_per_cell(
    const StokesSolution& solution, const StokesProblem& problem) {
  if (!problem.has_exact)
    throw std::invalid_argument("energy_error: problem carries no exact solution");
  const HpSpace& space = *solution.space;
  const Mesh& mesh = space.mesh();
  std::vector<double> eu2(mesh.n_cells(), 0.0), ep2(mesh.n_cells(), 0.0);

  for (int cell : mesh.active_cells()) {
    const int pv = space.velocity_degree(cell);
    const int pp = space.pressure_degree(cell);
    const int n1d = 2 * pv + 4;
    const Quadrature2D& rule = gauss_legendre_2d(n1d);
    const BasisTable& vt = basis_table(pv, n1d);
    const BasisTable& pt = basis_table(pp, n1d);
    const BilinearMap map = mesh.cell_map(cell);
    const auto& vdofs = space.velocity_layout().cell_dofs[cell];
    const auto& pdofs = space.pressure_layout().cell_dofs[cell];

    for (int q = 0; q < rule.size(); ++q) {
      const Vec2& xq = rule.points[q];
      const double jw = map.jacobian_det(xq) * rule.weights[q];
      const Vec2 x = map.to_physical(xq);

      Eigen::Matrix2d grad_fe = Eigen::Matrix2d::Zero();
      for (int b = 0; b < vt.n_basis; ++b) {
        const Vec2 pg = map.push_gradient(xq, Vec2(vt.gx(q, b), vt.gy(q, b)));
        grad_fe.row(0) += solution.coefficients[space.velocity_global(0, vdofs[b])] * pg.transpose();
        grad_fe.row(1) += solution.coefficients[space.velocity_global(1, vdofs[b])] * pg.transpose();
      }
      double p_fe = 0.0;
      for (int b = 0; b < pt.n_basis; ++b)
        p_fe += solution.coefficients[space.pressure_global(pdofs[b])] * pt.v(q, b);

      eu2[cell] += jw * (problem.exact_velocity_gradient(x) - grad_fe).squaredNorm();
      const double dp = problem.exact_pressure(x) - p_fe;
      ep2[cell] += jw * dp * dp;
    }
  }
  return {eu2, ep2};
}

EnergyError energy_error(const StokesSolution& solution, const StokesProblem& problem) {
  const auto [eu2, ep2] = energy_error_per_cell(solution, problem);
  EnergyError err;
  double su = 0.0, sp = 0.0;
  for (double v : eu2) su += v;
  for (double v : ep2) sp += v;
  err.e_u = std::sqrt(su);
  err.e_p = std::sqrt(sp);
  return err;
}

}  // namespace hpstokes
