#include "hpstokes/problems.hpp"

#include <cmath>

#include "hpstokes/quadrature.hpp"

namespace hpstokes {

namespace {

constexpr double kOmega = 1.5 * M_PI;

// Angular factor of the singular corner solution and its derivatives.
struct Psi {
  double v, d1, d2, d3;
};

Psi eval_psi(double phi, double alpha) {
  const double ca = std::cos(alpha * kOmega);
  const double ap = 1.0 + alpha, am = 1.0 - alpha;
  const double sp = std::sin(ap * phi), cp = std::cos(ap * phi);
  const double sm = std::sin(am * phi), cm = std::cos(am * phi);
  Psi psi;
  psi.v = sp * ca / ap - cp - sm * ca / am + cm;
  psi.d1 = cp * ca + ap * sp - cm * ca - am * sm;
  psi.d2 = -ap * sp * ca + ap * ap * cp + am * sm * ca - am * am * cm;
  psi.d3 = -ap * ap * cp * ca - ap * ap * ap * sp + am * am * cm * ca + am * am * am * sm;
  return psi;
}

// Polar angle in [0, 3*pi/2], measured from the positive x axis (the
// horizontal edge of the re-entrant corner); the branch cut lies inside the
// removed quadrant.
double corner_angle(const Vec2& x) {
  double phi = std::atan2(x.y(), x.x());
  if (phi < 0.0) phi += 2.0 * M_PI;
  return phi;
}

}  // namespace

double solve_exponent(double omega) {
  const auto f = [omega](double a) { return std::sin(a * omega) + a * std::sin(omega); };
  double lo = 1e-8, hi = 1.0;
  if (!(f(lo) > 0.0 && f(hi) < 0.0) && !(f(lo) < 0.0 && f(hi) > 0.0))
    throw std::invalid_argument("solve_exponent: no sign change on (0,1)");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if ((f(lo) > 0.0) == (f(mid) > 0.0))
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double integrate_l_shape(const ScalarField& f) {
  const Quadrature2D& rule = gauss_legendre_2d(12);
  const auto square = [&](Vec2 lo, double s, auto&& self, int depth) -> double {
    const bool at_corner = (lo.x() == 0.0 || lo.x() + s == 0.0) && (lo.y() == 0.0 || lo.y() + s == 0.0);
    if (at_corner && depth < 26) {
      double sum = 0.0;
      const double h = 0.5 * s;
      for (int j = 0; j < 2; ++j)
        for (int i = 0; i < 2; ++i)
          sum += self(lo + Vec2(i * h, j * h), h, self, depth + 1);
      return sum;
    }
    double sum = 0.0;
    for (int q = 0; q < rule.size(); ++q)
      sum += rule.weights[q] * f(lo + s * rule.points[q]);
    return sum * s * s;
  };
  double total = 0.0;
  total += square(Vec2(-1.0, -1.0), 1.0, square, 0);
  total += square(Vec2(-1.0, 0.0), 1.0, square, 0);
  total += square(Vec2(0.0, 0.0), 1.0, square, 0);
  return total;
}

Benchmark example1() {
  Benchmark bench;
  bench.name = "smooth-l";
  bench.theta_default = 0.75;
  bench.initial_degree = 3;

  // exp(x) * trig pair; the constant makes the pressure mean vanish on the
  // L-shaped domain.
  const double mean_shift = (2.0 / 3.0) * (1.0 - M_E) * (std::cos(1.0) - 1.0);
  auto u = [](const Vec2& x) {
    const double ex = std::exp(x.x());
    return Vec2(-ex * (x.y() * std::cos(x.y()) + std::sin(x.y())), ex * x.y() * std::sin(x.y()));
  };
  auto grad_u = [](const Vec2& x) {
    const double ex = std::exp(x.x());
    const double y = x.y();
    Eigen::Matrix2d g;
    g(0, 0) = -ex * (y * std::cos(y) + std::sin(y));
    g(0, 1) = -ex * (2.0 * std::cos(y) - y * std::sin(y));
    g(1, 0) = ex * y * std::sin(y);
    g(1, 1) = ex * (std::sin(y) + y * std::cos(y));
    return g;
  };
  auto rho = [mean_shift](const Vec2& x) {
    return 2.0 * std::exp(x.x()) * std::sin(x.y()) - mean_shift;
  };

  StokesProblem& p = bench.problem;
  p.viscosity = 1.0;
  p.body_force = [](const Vec2&) { return Vec2(0.0, 0.0); };
  p.dirichlet = u;
  p.has_exact = true;
  p.exact_velocity = u;
  p.exact_velocity_gradient = grad_u;
  p.exact_pressure = rho;
  return bench;
}

Benchmark example2() {
  Benchmark bench;
  bench.name = "singular-l";
  bench.theta_default = 0.85;
  bench.initial_degree = 2;

  const double alpha = solve_exponent(kOmega);

  auto velocity_factor = [alpha](double phi) {
    const Psi psi = eval_psi(phi, alpha);
    const double c = std::cos(phi), s = std::sin(phi);
    return Vec2(c * psi.d1 + (1.0 + alpha) * s * psi.v, s * psi.d1 - (1.0 - alpha) * c * psi.v);
  };
  auto u = [alpha, velocity_factor](const Vec2& x) {
    const double r = x.norm();
    if (r == 0.0) return Vec2(0.0, 0.0);
    return Vec2(std::pow(r, alpha) * velocity_factor(corner_angle(x)));
  };
  auto grad_u = [alpha, velocity_factor](const Vec2& x) {
    const double r = x.norm();
    if (r == 0.0)
      throw std::domain_error("example2: velocity gradient is singular at the corner");
    const double phi = corner_angle(x);
    const Psi psi = eval_psi(phi, alpha);
    const double c = std::cos(phi), s = std::sin(phi);
    const Vec2 v = velocity_factor(phi);
    // d/dphi of the angular factor.
    const Vec2 dv(c * psi.d2 - s * psi.d1 + (1.0 + alpha) * (c * psi.v + s * psi.d1),
                  s * psi.d2 + c * psi.d1 - (1.0 - alpha) * (c * psi.d1 - s * psi.v));
    const double ra = std::pow(r, alpha - 1.0);
    Eigen::Matrix2d g;
    for (int i = 0; i < 2; ++i) {
      g(i, 0) = ra * (alpha * c * v[i] - s * dv[i]);
      g(i, 1) = ra * (alpha * s * v[i] + c * dv[i]);
    }
    return g;
  };
  auto rho_raw = [alpha](const Vec2& x) {
    const double r = x.norm();
    if (r == 0.0) throw std::domain_error("example2: pressure is singular at the corner");
    const Psi psi = eval_psi(corner_angle(x), alpha);
    const double ap = 1.0 + alpha;
    return -std::pow(r, alpha - 1.0) * (ap * ap * psi.d1 + psi.d3) / (1.0 - alpha);
  };
  const double mean = integrate_l_shape(rho_raw) / 3.0;
  auto rho = [rho_raw, mean](const Vec2& x) { return rho_raw(x) - mean; };

  StokesProblem& p = bench.problem;
  p.viscosity = 1.0;
  p.body_force = [](const Vec2&) { return Vec2(0.0, 0.0); };
  p.dirichlet = u;
  p.has_exact = true;
  p.exact_velocity = u;
  p.exact_velocity_gradient = grad_u;
  p.exact_pressure = rho;
  return bench;
}

}  // namespace hpstokes
