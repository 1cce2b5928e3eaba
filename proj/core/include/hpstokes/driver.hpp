#pragma once

#include <string>
#include <vector>

#include "hpstokes/adaptivity.hpp"
#include "hpstokes/problems.hpp"

namespace hpstokes {

/// Configuration of one adaptive run.  Negative theta / initial_degree pick
/// the benchmark defaults (smooth-l: theta 0.75, Q3; singular-l: theta
/// 0.85, Q2).
struct RunConfig {
  std::string example = "smooth-l";  // smooth-l | singular-l
  std::string mode = "hp";           // h | p | hp
  double theta = -1.0;
  double alpha = 0.0;
  int initial_degree = -1;
  int max_cycles = 8;
  long max_dofs = 200000;
  std::string out_dir = ".";
  bool write_files = true;

  void validate() const;  // throws std::invalid_argument
};

/// One SOLVE -> ESTIMATE -> MARK row of the adaptive history.
struct CycleRecord {
  int cycle = 0;
  int n_cells = 0;
  long n_dofs = 0;
  double error_u = 0.0, error_p = 0.0, error_total = 0.0;
  double eta = 0.0, i_eff = 0.0;
  int n_h = 0, n_p = 0;
  double seconds = 0.0;
  // Marking evidence (not part of the CSV contract).
  double marked_sum = 0.0, threshold = 0.0;
  bool minimality = true, fallback = false;
};

/// Runs the adaptive loop until max_cycles refinements or until max_dofs is
/// reached.  Mode h forces the isotropic pattern with unit indicators, mode
/// p forces degree raises; hp computes both Ritz indicators per cell and
/// picks the workload-normalized winner.  Writes history.csv and
/// cycle_<k>.vtk into out_dir as it goes.
std::vector<CycleRecord> run(const RunConfig& config);

/// history.csv: pinned header, one row per cycle, %.17g numbers, LF endings.
void emit_csv(const std::vector<CycleRecord>& records, const std::string& path);

}  // namespace hpstokes
