#pragma once

#include <string>

#include "hpstokes/stokes.hpp"

namespace hpstokes {

/// An analytic benchmark on the L-shaped domain: exact solution, data, and
/// the recommended adaptive-run defaults.
struct Benchmark {
  std::string name;
  StokesProblem problem;
  double theta_default = 0.75;
  int initial_degree = 3;
  int initial_cells = 12;
};

/// Smooth solution u = [-e^x (y cos y + sin y), e^x y sin y] with
/// rho = 2 e^x sin y shifted to zero mean; f = 0, nu = 1.
Benchmark example1();

/// Corner-singularity solution r^alpha psi(phi) with the exponent alpha of
/// the 3*pi/2 opening; f = 0, nu = 1.  The pressure is singular at the
/// re-entrant corner and throws when evaluated there.
Benchmark example2();

/// Smallest positive root of sin(alpha*omega) + alpha*sin(omega) = 0 by
/// bisection on (0,1); throws if the bracket has no sign change.
double solve_exponent(double omega);

/// Quadrature of f over the L-shaped domain, geometrically refined toward
/// the re-entrant corner (handles r^(alpha-1)-type integrands).
double integrate_l_shape(const ScalarField& f);

}  // namespace hpstokes
