#pragma once

#include "hpstokes/stokes.hpp"

namespace hpstokes {

/// Per-cell terms of the weighted residual estimator family, plus global
/// aggregates.  Vectors are indexed by cell id; inactive cells hold zeros.
struct EstimatorReport {
  double alpha = 0.0;
  std::vector<double> r1;    // cell residual term
  std::vector<double> r2;    // divergence term
  std::vector<double> b;     // face-jump term
  std::vector<double> osc;   // data oscillation (h_K/p_K)||f - I f||_K
  std::vector<double> eta_cell;  // sqrt(r1^2 + r2^2 + b^2)
  double eta = 0.0;
  std::vector<int> active;
};

/// Interior distance weight dist(x, dK)/h_K of a cell at a physical point.
double weight_cell(const Mesh& mesh, int cell, const Vec2& x);

/// Patch weight dist(x, d omega_f)/diam(omega_f) for a point on an interior
/// face; omega_f is the union of the two adjacent cells.  Throws for
/// boundary faces.
double weight_face_patch(const Mesh& mesh, int face, const Vec2& x);

/// Componentwise local L2 projection of f onto the mapped Q_degree space of
/// the cell; returns (degree+1)^2 x 2 coefficients in the Lobatto basis.
Eigen::MatrixXd project_rhs(const Mesh& mesh, int cell, int degree, const VectorField& f);

struct CellTerms {
  double r1 = 0.0, r2 = 0.0, osc = 0.0;
};

/// Weighted cell residual, divergence, and oscillation terms of one cell.
CellTerms cell_terms(const StokesSolution& solution, const StokesProblem& problem, int cell,
                     double alpha);

/// Weighted normal-derivative jump term of one cell, summed over its
/// interior faces (each with the 1/2 shared-face factor).
double face_term(const StokesSolution& solution, const StokesProblem& problem, int cell,
                 double alpha);

EstimatorReport estimate(const StokesSolution& solution, const StokesProblem& problem,
                         double alpha);

/// eta / sqrt(e_u^2 + e_p^2); throws on zero error.
double effectivity(const EstimatorReport& report, double e_u, double e_p);

}  // namespace hpstokes
