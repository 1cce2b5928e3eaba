#include "hpstokes/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace hpstokes {

namespace {

// Legendre polynomial P_n and derivative P'_n on [-1,1].
void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  if (n == 0) {
    p = p0;
    dp = 0.0;
    return;
  }
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace

Quadrature1D gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  Quadrature1D rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    // Root of P_n near the k-th Chebyshev point, by Newton iteration.
    double x = std::cos(M_PI * (k + 0.75) / (n + 0.5));
    double p = 0.0, dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      legendre(n, x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    legendre(n, x, p, dp);
    // cos() enumerates roots in descending order; fill back-to-front.
    rule.points[n - 1 - k] = 0.5 * (x + 1.0);
    rule.weights[n - 1 - k] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

Quadrature2D tensor_rule(const Quadrature1D& rule_x, const Quadrature1D& rule_y) {
  Quadrature2D rule;
  rule.points.reserve(rule_x.size() * rule_y.size());
  rule.weights.reserve(rule_x.size() * rule_y.size());
  for (int j = 0; j < rule_y.size(); ++j) {
    for (int i = 0; i < rule_x.size(); ++i) {
      rule.points.emplace_back(rule_x.points[i], rule_y.points[j]);
      rule.weights.push_back(rule_x.weights[i] * rule_y.weights[j]);
    }
  }
  return rule;
}

const Quadrature2D& gauss_legendre_2d(int n) {
  static std::mutex mutex;
  static std::map<int, Quadrature2D> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) {
    const Quadrature1D rule = gauss_legendre(n);
    it = cache.emplace(n, tensor_rule(rule, rule)).first;
  }
  return it->second;
}

std::vector<double> gauss_lobatto_points(int degree) {
  if (degree < 1) throw std::invalid_argument("gauss_lobatto_points: degree must be >= 1");
  const int n = degree;  // interior points are the roots of P'_n
  std::vector<double> pts(n + 1);
  pts.front() = 0.0;
  pts.back() = 1.0;
  for (int k = 1; k < n; ++k) {
    double x = std::cos(M_PI * k / n);  // Chebyshev-Lobatto initial guess
    for (int it = 0; it < 100; ++it) {
      double p, dp;
      legendre(n, x, p, dp);
      // P''_n from the Legendre ODE: (1-x^2) P'' = 2x P' - n(n+1) P.
      const double ddp = (2.0 * x * dp - n * (n + 1.0) * p) / (1.0 - x * x);
      const double dx = dp / ddp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    pts[n - k] = 0.5 * (x + 1.0);
  }
  // Symmetrize exactly so that node k and node n-k mirror bit-for-bit.
  for (int k = 0; 2 * k < n; ++k) {
    const double lo = 0.5 * (pts[k] + (1.0 - pts[n - k]));
    pts[k] = lo;
    pts[n - k] = 1.0 - lo;
  }
  if (n % 2 == 0) pts[n / 2] = 0.5;
  return pts;
}

}  // namespace hpstokes
