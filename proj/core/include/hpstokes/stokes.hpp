#pragma once

#include <stdexcept>

#include <Eigen/Sparse>

#include "hpstokes/space.hpp"

namespace hpstokes {

/// Stationary Stokes data: viscosity, body force, Dirichlet boundary
/// values, and (optionally) the exact solution for error evaluation.
struct StokesProblem {
  double viscosity = 1.0;
  VectorField body_force;
  VectorField dirichlet;

  bool has_exact = false;
  VectorField exact_velocity;
  std::function<Eigen::Matrix2d(const Vec2&)> exact_velocity_gradient;  // (i,j) = d u_i/d x_j
  ScalarField exact_pressure;
};

/// Discrete velocity/pressure pair as a full coefficient vector over the
/// space's [u_x | u_y | p] numbering, constraints satisfied.
struct StokesSolution {
  const HpSpace* space = nullptr;
  const ConstraintSet* constraints = nullptr;
  Eigen::VectorXd coefficients;
};

struct AssembledSystem {
  Eigen::SparseMatrix<double> matrix;  // reduced (free dofs), symmetric indefinite
  Eigen::VectorXd rhs;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), achieved_residual(residual) {}
  double achieved_residual = 0.0;
};

/// Assembles the condensed saddle-point system for
/// L([u,p];[v,q]) = (f,v) with blocks (nu grad u, grad v), -(p, div v),
/// -(div u, q); constraint inhomogeneities are moved to the right side.
/// Throws std::runtime_error naming the cell on a singular cell map.
AssembledSystem assemble(const HpSpace& space, const ConstraintSet& constraints,
                         const StokesProblem& problem);

/// Direct sparse factorization; throws SolverError if the relative
/// algebraic residual exceeds 1e-10.
StokesSolution solve(const HpSpace& space, const ConstraintSet& constraints,
                     const AssembledSystem& system);

struct EnergyError {
  double e_u = 0.0;  // || grad(u - u_FE) ||
  double e_p = 0.0;  // || p - p_FE ||
  double total() const { return std::sqrt(e_u * e_u + e_p * e_p); }
};

/// Energy error against the problem's exact solution, quadrature order
/// 2p+4 per direction.  Throws if the exact solution is absent.
EnergyError energy_error(const StokesSolution& solution, const StokesProblem& problem);

/// Per-cell squared contributions (velocity, pressure), indexed by cell id.
std::pair<std::vector<double>, std::vector<double>> energy_error_per_cell(
    const StokesSolution& solution, const StokesProblem& problem);

}  // namespace hpstokes
