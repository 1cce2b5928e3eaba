#include <iostream>

#include <CLI11.hpp>

#include "hpstokes/driver.hpp"

int main(int argc, char** argv) {
  CLI::App app{"hp-adaptive Stokes solver on the L-shaped domain"};

  hpstokes::RunConfig config;
  app.add_option("--example", config.example, "Benchmark: smooth-l or singular-l")
      ->check(CLI::IsMember({"smooth-l", "singular-l"}));
  app.add_option("--mode", config.mode, "Refinement mode: h, p, or hp")
      ->check(CLI::IsMember({"h", "p", "hp"}));
  app.add_option("--theta", config.theta, "Bulk marking fraction in (0,1); default per example");
  app.add_option("--alpha", config.alpha, "Estimator weight exponent in [0,1]")->default_val(0.0);
  app.add_option("--initial-degree", config.initial_degree,
                 "Starting velocity degree (>= 2); default per example");
  app.add_option("--max-cycles", config.max_cycles, "Number of refinement cycles")
      ->default_val(8);
  app.add_option("--max-dofs", config.max_dofs, "Stop once the space reaches this many dofs")
      ->default_val(200000);
  app.add_option("--out", config.out_dir, "Output directory for history.csv and cycle_<k>.vtk")
      ->default_val(".");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    const auto records = hpstokes::run(config);
    std::cout << "wrote " << records.size() << " cycles to " << config.out_dir << "\n";
  } catch (const hpstokes::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
