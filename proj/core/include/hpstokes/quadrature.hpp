#pragma once

#include <vector>

#include <Eigen/Core>

namespace hpstokes {

using Vec2 = Eigen::Vector2d;

/// One-dimensional quadrature rule on the reference interval [0,1].
struct Quadrature1D {
  std::vector<double> points;
  std::vector<double> weights;

  int size() const { return static_cast<int>(points.size()); }
};

/// Tensor-product quadrature rule on the reference square [0,1]^2.
struct Quadrature2D {
  std::vector<Vec2> points;
  std::vector<double> weights;

  int size() const { return static_cast<int>(points.size()); }
};

/// n-point Gauss-Legendre rule on [0,1], exact for polynomials of degree
/// <= 2n-1.  Throws std::invalid_argument for n < 1.
Quadrature1D gauss_legendre(int n);

/// Tensor product of two 1D rules (x runs fastest).
Quadrature2D tensor_rule(const Quadrature1D& rule_x, const Quadrature1D& rule_y);

/// Cached n x n Gauss-Legendre tensor rule on the reference square.
const Quadrature2D& gauss_legendre_2d(int n);

/// The degree+1 Gauss-Lobatto points on [0,1] (endpoints included),
/// ascending.  These are the 1D interpolation nodes of the shape basis.
std::vector<double> gauss_lobatto_points(int degree);

}  // namespace hpstokes
