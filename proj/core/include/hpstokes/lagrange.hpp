#pragma once

#include <vector>

#include <Eigen/Core>

#include "hpstokes/quadrature.hpp"

namespace hpstokes {

/// Second derivatives of a scalar function of two variables.
struct Hess2 {
  double xx = 0.0, xy = 0.0, yy = 0.0;
};

/// Lagrange basis of given degree on the Gauss-Lobatto points of [0,1].
class Lagrange1D {
 public:
  explicit Lagrange1D(int degree);

  int degree() const { return degree_; }
  const std::vector<double>& nodes() const { return nodes_; }

  /// Values (and optionally first/second derivatives) of all degree+1
  /// basis polynomials at x.  Output arrays must hold degree+1 entries.
  void eval(double x, double* val, double* d1 = nullptr, double* d2 = nullptr) const;

 private:
  int degree_;
  std::vector<double> nodes_;
  std::vector<double> scale_;  // barycentric weights 1/prod_{j!=i}(x_i-x_j)
};

/// Cached Lagrange1D basis for a degree.
const Lagrange1D& lagrange_basis(int degree);

/// Tensor-product shape functions on the reference square, Lobatto-node
/// Lagrange basis, lexicographic numbering i + j*(degree+1) with x fastest.
/// Fills values and, when the pointers are non-null, reference gradients
/// and second derivatives.  All vectors are resized to (degree+1)^2.
void tensor_shape_values(int degree, const Vec2& x, std::vector<double>& val,
                         std::vector<Vec2>* grad = nullptr,
                         std::vector<Hess2>* hess = nullptr);

/// Reference coordinates of the k-th tensor node.
Vec2 tensor_node(int degree, int k);

/// Basis values and derivatives tabulated at the points of a quadrature
/// rule; layout [point][basis] in row-major blocks.
struct BasisTable {
  int degree = 0;
  int n_points = 0;
  int n_basis = 0;
  std::vector<double> val, dxi, deta, dxx, dxy, dyy;

  double v(int q, int b) const { return val[q * n_basis + b]; }
  double gx(int q, int b) const { return dxi[q * n_basis + b]; }
  double gy(int q, int b) const { return deta[q * n_basis + b]; }
  double hxx(int q, int b) const { return dxx[q * n_basis + b]; }
  double hxy(int q, int b) const { return dxy[q * n_basis + b]; }
  double hyy(int q, int b) const { return dyy[q * n_basis + b]; }
};

/// Cached table of the degree-p tensor basis at the n x n Gauss points.
const BasisTable& basis_table(int degree, int n_1d);

}  // namespace hpstokes
