#pragma once

#include <memory>

#include "hpstokes/estimator.hpp"

namespace hpstokes {

/// The two refinement patterns: isotropic 1->4 mesh refinement and raising
/// the polynomial degree by one.  none is the test hook for the unrefined
/// patch space.
enum class Pattern { none = 0, h = 1, p = 2 };

/// Standalone discretization of a cell patch omega_K: its own mesh (refined
/// per pattern), Taylor-Hood space, and homogeneous constraints (zero
/// velocity trace on the patch boundary, zero-mean pressure).  origin maps
/// every active patch cell into the reference square of its global cell.
struct PatchSpace {
  Mesh mesh;
  std::vector<int> degrees;
  struct Origin {
    int global_cell = -1;
    Vec2 offset = Vec2::Zero();
    double scale = 1.0;
  };
  std::vector<Origin> origin;  // per patch cell id
  std::unique_ptr<HpSpace> space;
  ConstraintSet constraints;
};

PatchSpace build_patch_space(const HpSpace& global, int cell, Pattern pattern);

struct RitzSystem {
  Eigen::SparseMatrix<double> matrix;  // (grad v, grad w_u) + (q, w_rho); SPD
  Eigen::VectorXd rhs;                 // residual of the global solution
};

/// Ritz projection of the Stokes residual onto the patch space.
RitzSystem assemble_ritz(const PatchSpace& patch, const StokesSolution& solution,
                         const StokesProblem& problem);

struct RitzResult {
  double norm_sq = 0.0;  // ||grad w_u||^2 + ||w_rho||^2 on the patch
  int workload = 0;      // free dofs of the patch space
};

RitzResult local_ritz(const StokesSolution& solution, const StokesProblem& problem, int cell,
                      Pattern pattern);

/// k_{K,j} = sqrt(||grad w_u||^2 + ||w_rho||^2) / eta_K; zero when the cell
/// is already resolved (eta_K = 0).
double convergence_indicator(const StokesSolution& solution, const StokesProblem& problem,
                             int cell, Pattern pattern, double eta_cell);

/// Free-dof count of the pattern's patch space.
int workload(const HpSpace& space, int cell, Pattern pattern);

/// argmax_j k_j / w_j; ties break toward p-refinement.
Pattern choose_pattern(double k_h, double k_p, int workload_h, int workload_p);

struct CellDecision {
  int cell = -1;
  Pattern chosen = Pattern::p;
  double k_h = 0.0, k_p = 0.0;
  int workload_h = 1, workload_p = 1;
  double k_selected = 0.0;
};

struct RefinementPlan {
  std::vector<CellDecision> decisions;  // all active cells, ascending id
  std::vector<int> marked;              // greedy order (weight descending)
  bool fallback = false;                // full set marked, inequality unsatisfiable
  double marked_sum = 0.0;              // sum of k^2 eta_K^2 over marked
  double threshold = 0.0;               // theta^2 eta^2
  bool minimality = true;               // dropping the last marked cell breaks the bound
};

/// Greedy bulk marking: shortest weight-sorted prefix with
/// sum k^2 eta_K^2 >= theta^2 eta^2, falling back to the full set when even
/// that fails.  Throws on an empty mesh or theta outside (0,1).
RefinementPlan doerfler_mark(const EstimatorReport& report,
                             const std::vector<CellDecision>& decisions, double theta);

/// Executes the plan: h-marked cells refine (children inherit the degree),
/// p-marked cells gain one degree, then degrees are smoothed upward until
/// gamma_p-regularity holds.
void apply_plan(Mesh& mesh, std::vector<int>& degrees, const RefinementPlan& plan,
                double gamma_p = 2.0);

}  // namespace hpstokes
