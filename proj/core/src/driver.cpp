#include "hpstokes/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "hpstokes/vtk_io.hpp"

namespace hpstokes {

void RunConfig::validate() const {
  if (example != "smooth-l" && example != "singular-l")
    throw std::invalid_argument("config: example must be smooth-l or singular-l");
  if (mode != "h" && mode != "p" && mode != "hp")
    throw std::invalid_argument("config: mode must be h, p, or hp");
  if (theta >= 0.0 && !(theta > 0.0 && theta < 1.0))
    throw std::invalid_argument("config: theta must lie in (0,1)");
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("config: alpha must lie in [0,1]");
  if (initial_degree >= 0 && initial_degree < 2)
    throw std::invalid_argument("config: initial degree must be >= 2");
  if (max_cycles < 0) throw std::invalid_argument("config: max cycles must be >= 0");
  if (max_dofs < 1) throw std::invalid_argument("config: max dofs must be >= 1");
}

void emit_csv(const std::vector<CycleRecord>& records, const std::string& path) {
  if (records.empty()) throw std::invalid_argument("emit_csv: no records");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_csv: cannot open " + path);
  out << "cycle,n_cells,n_dofs,error_u,error_p,error_total,eta,i_eff,n_h,n_p,seconds\n";
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const CycleRecord& r : records) {
    out << r.cycle << ',' << r.n_cells << ',' << r.n_dofs << ',' << num(r.error_u) << ','
        << num(r.error_p) << ',' << num(r.error_total) << ',' << num(r.eta) << ','
        << num(r.i_eff) << ',' << r.n_h << ',' << r.n_p << ',' << num(r.seconds) << '\n';
  }
  if (!out) throw std::runtime_error("emit_csv: write failed for " + path);
}

namespace {

void write_cycle_vtk(const Mesh& mesh, const std::vector<int>& degrees,
                     const EstimatorReport& report, const RefinementPlan& plan,
                     const std::string& path) {
  const std::vector<int> active = mesh.active_cells();
  std::vector<double> degree, level, eta, r1, r2, b, osc, k_sel, marked, pattern;
  std::map<int, const CellDecision*> decision;
  for (const CellDecision& d : plan.decisions) decision[d.cell] = &d;
  std::set<int> marked_set(plan.marked.begin(), plan.marked.end());
  for (int c : active) {
    degree.push_back(degrees[c]);
    level.push_back(mesh.cell(c).level);
    eta.push_back(report.eta_cell[c]);
    r1.push_back(report.r1[c]);
    r2.push_back(report.r2[c]);
    b.push_back(report.b[c]);
    osc.push_back(report.osc[c]);
    const auto it = decision.find(c);
    k_sel.push_back(it != decision.end() ? it->second->k_selected : 0.0);
    const bool is_marked = marked_set.count(c) > 0;
    marked.push_back(is_marked ? 1.0 : 0.0);
    pattern.push_back(is_marked && it != decision.end() ? static_cast<double>(it->second->chosen)
                                                        : 0.0);
  }
  write_vtk(mesh,
            {{"degree", true, degree},
             {"level", true, level},
             {"eta", false, eta},
             {"eta_r1", false, r1},
             {"eta_r2", false, r2},
             {"eta_b", false, b},
             {"osc", false, osc},
             {"k_selected", false, k_sel},
             {"marked", true, marked},
             {"pattern", true, pattern}},
            path);
}

}  // namespace

std::vector<CycleRecord> run(const RunConfig& config) {
  config.validate();
  const Benchmark bench = config.example == "smooth-l" ? example1() : example2();
  const double theta = config.theta >= 0.0 ? config.theta : bench.theta_default;
  const int degree0 = config.initial_degree >= 0 ? config.initial_degree : bench.initial_degree;

  Mesh mesh = make_l_shape_mesh(bench.initial_cells);
  std::vector<int> degrees(mesh.n_cells(), degree0);

  namespace fs = std::filesystem;
  if (config.write_files) fs::create_directories(config.out_dir);
  const std::string csv_path = (fs::path(config.out_dir) / "history.csv").string();

  std::vector<CycleRecord> records;
  std::cout << "# " << bench.name << " mode=" << config.mode << " theta=" << theta
            << " alpha=" << config.alpha << "\n";
  std::cout << "# level  #cells    #h    #p\n";

  try {
    for (int cycle = 0;; ++cycle) {
      const auto t0 = std::chrono::steady_clock::now();
      const HpSpace space(mesh, degrees);
      const ConstraintSet constraints = build_constraints(space, {0}, bench.problem.dirichlet);
      const AssembledSystem system = assemble(space, constraints, bench.problem);
      const StokesSolution solution = solve(space, constraints, system);
      const EnergyError error = energy_error(solution, bench.problem);
      const EstimatorReport report = estimate(solution, bench.problem, config.alpha);

      CycleRecord record;
      record.cycle = cycle;
      record.n_cells = mesh.n_active_cells();
      record.n_dofs = space.n_total();
      record.error_u = error.e_u;
      record.error_p = error.e_p;
      record.error_total = error.total();
      record.eta = report.eta;
      record.i_eff = record.error_total > 0.0 ? report.eta / record.error_total : 0.0;

      const bool stop = cycle >= config.max_cycles || space.n_total() >= config.max_dofs ||
                        report.eta == 0.0;
      RefinementPlan plan;
      if (!stop) {
        std::vector<CellDecision> decisions;
        for (int c : mesh.active_cells()) {
          CellDecision d;
          d.cell = c;
          if (config.mode == "hp") {
            d.k_h = convergence_indicator(solution, bench.problem, c, Pattern::h,
                                          report.eta_cell[c]);
            d.k_p = convergence_indicator(solution, bench.problem, c, Pattern::p,
                                          report.eta_cell[c]);
            d.workload_h = workload(space, c, Pattern::h);
            d.workload_p = workload(space, c, Pattern::p);
            d.chosen = choose_pattern(d.k_h, d.k_p, d.workload_h, d.workload_p);
          } else if (config.mode == "h") {
            d.k_h = 1.0;
            d.chosen = Pattern::h;
          } else {
            d.k_p = 1.0;
            d.chosen = Pattern::p;
          }
          d.k_selected = d.chosen == Pattern::h ? d.k_h : d.k_p;
          decisions.push_back(d);
        }
        plan = doerfler_mark(report, decisions, theta);
        std::map<int, Pattern> chosen_of;
        for (const CellDecision& d : plan.decisions) chosen_of[d.cell] = d.chosen;
        for (int c : plan.marked) {
          if (chosen_of.at(c) == Pattern::h)
            ++record.n_h;
          else
            ++record.n_p;
        }
        record.marked_sum = plan.marked_sum;
        record.threshold = plan.threshold;
        record.minimality = plan.minimality;
        record.fallback = plan.fallback;
      }

      record.seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      records.push_back(record);
      std::printf("  %5d  %6d  %4d  %4d\n", cycle, record.n_cells, record.n_h, record.n_p);

      if (config.write_files) {
        write_cycle_vtk(mesh, degrees, report, plan,
                        (fs::path(config.out_dir) / ("cycle_" + std::to_string(cycle) + ".vtk"))
                            .string());
        emit_csv(records, csv_path);
      }

      if (stop) break;
      apply_plan(mesh, degrees, plan);
    }
  } catch (...) {
    if (config.write_files && !records.empty()) emit_csv(records, csv_path);
    throw;
  }
  return records;
}

}  // namespace hpstokes
