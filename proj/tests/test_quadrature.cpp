#include <doctest.h>

#include <cmath>
#include <random>

#include "hpstokes/lagrange.hpp"
#include "hpstokes/quadrature.hpp"

using namespace hpstokes;

TEST_CASE("gauss_legendre rejects n = 0") {
  CHECK_THROWS_AS(gauss_legendre(0), std::invalid_argument);
}

TEST_CASE("gauss_legendre small rules match closed forms") {
  const Quadrature1D one = gauss_legendre(1);
  CHECK(one.points[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(one.weights[0] == doctest::Approx(1.0).epsilon(1e-15));

  const Quadrature1D two = gauss_legendre(2);
  const double offset = std::sqrt(3.0) / 6.0;
  CHECK(two.points[0] == doctest::Approx(0.5 - offset).epsilon(1e-14));
  CHECK(two.points[1] == doctest::Approx(0.5 + offset).epsilon(1e-14));
  CHECK(two.weights[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(two.weights[1] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("gauss_legendre moment identities up to degree 2n-1") {
  for (int n = 1; n <= 16; ++n) {
    const Quadrature1D rule = gauss_legendre(n);
    double wsum = 0.0;
    for (double w : rule.weights) wsum += w;
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double moment = 0.0;
      for (int i = 0; i < n; ++i) moment += rule.weights[i] * std::pow(rule.points[i], k);
      CHECK(moment == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
    }
  }
}

TEST_CASE("tensor rule integrates x^a y^b exactly") {
  for (int n : {2, 4, 7}) {
    const Quadrature2D rule = tensor_rule(gauss_legendre(n), gauss_legendre(n));
    for (int a = 0; a <= 2 * n - 1; a += 3) {
      for (int b = 0; b <= 2 * n - 1; b += 4) {
        double val = 0.0;
        for (int q = 0; q < rule.size(); ++q)
          val += rule.weights[q] * std::pow(rule.points[q].x(), a) * std::pow(rule.points[q].y(), b);
        const double exact = 1.0 / ((a + 1.0) * (b + 1.0));
        CHECK(val == doctest::Approx(exact).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("gauss_lobatto_points include endpoints and are symmetric") {
  for (int p = 1; p <= 12; ++p) {
    const auto pts = gauss_lobatto_points(p);
    REQUIRE(pts.size() == static_cast<size_t>(p + 1));
    CHECK(pts.front() == 0.0);
    CHECK(pts.back() == 1.0);
    for (int k = 0; k <= p; ++k) {
      CHECK(pts[k] == doctest::Approx(1.0 - pts[p - k]).epsilon(1e-15));
      if (k > 0) CHECK(pts[k] > pts[k - 1]);
    }
  }
  const auto q2 = gauss_lobatto_points(2);
  CHECK(q2[1] == 0.5);
  // Degree 3: interior nodes at (1 -+ 1/sqrt(5))/2.
  const auto q3 = gauss_lobatto_points(3);
  CHECK(q3[1] == doctest::Approx(0.5 - 0.5 / std::sqrt(5.0)).epsilon(1e-14));
}

TEST_CASE("shape values: partition of unity and Kronecker property") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int p = 1; p <= 6; ++p) {
    std::vector<double> val;
    for (int trial = 0; trial < 10; ++trial) {
      const Vec2 x(unit(rng), unit(rng));
      tensor_shape_values(p, x, val);
      double sum = 0.0;
      for (double v : val) sum += v;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-13));
    }
    const int nb = (p + 1) * (p + 1);
    for (int node = 0; node < nb; ++node) {
      tensor_shape_values(p, tensor_node(p, node), val);
      for (int b = 0; b < nb; ++b)
        CHECK(val[b] == doctest::Approx(b == node ? 1.0 : 0.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("bilinear shape values at the cell center") {
  std::vector<double> val;
  tensor_shape_values(1, Vec2(0.5, 0.5), val);
  for (double v : val) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("gradients match central finite differences") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  const double step = 1e-6;
  for (int p = 1; p <= 6; ++p) {
    std::vector<double> vp, vm, val;
    std::vector<Vec2> grad;
    for (int trial = 0; trial < 20; ++trial) {
      const Vec2 x(unit(rng), unit(rng));
      tensor_shape_values(p, x, val, &grad);
      tensor_shape_values(p, Vec2(x.x() + step, x.y()), vp);
      tensor_shape_values(p, Vec2(x.x() - step, x.y()), vm);
      for (size_t b = 0; b < val.size(); ++b)
        CHECK(grad[b].x() == doctest::Approx((vp[b] - vm[b]) / (2 * step)).epsilon(1e-6));
      tensor_shape_values(p, Vec2(x.x(), x.y() + step), vp);
      tensor_shape_values(p, Vec2(x.x(), x.y() - step), vm);
      for (size_t b = 0; b < val.size(); ++b)
        CHECK(grad[b].y() == doctest::Approx((vp[b] - vm[b]) / (2 * step)).epsilon(1e-6));
    }
  }
}

TEST_CASE("second derivatives match finite differences of gradients") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  const double step = 1e-5;
  std::vector<double> val;
  std::vector<Vec2> gp, gm, g;
  std::vector<Hess2> hess;
  for (int p : {2, 4, 6}) {
    for (int trial = 0; trial < 5; ++trial) {
      const Vec2 x(unit(rng), unit(rng));
      tensor_shape_values(p, x, val, &g, &hess);
      tensor_shape_values(p, Vec2(x.x() + step, x.y()), val, &gp);
      tensor_shape_values(p, Vec2(x.x() - step, x.y()), val, &gm);
      for (size_t b = 0; b < hess.size(); ++b) {
        CHECK(hess[b].xx == doctest::Approx((gp[b].x() - gm[b].x()) / (2 * step)).epsilon(1e-4));
        CHECK(hess[b].xy == doctest::Approx((gp[b].y() - gm[b].y()) / (2 * step)).epsilon(1e-4));
      }
      tensor_shape_values(p, Vec2(x.x(), x.y() + step), val, &gp);
      tensor_shape_values(p, Vec2(x.x(), x.y() - step), val, &gm);
      for (size_t b = 0; b < hess.size(); ++b)
        CHECK(hess[b].yy == doctest::Approx((gp[b].y() - gm[b].y()) / (2 * step)).epsilon(1e-4));
    }
  }
}
