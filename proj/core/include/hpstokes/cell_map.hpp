#pragma once

#include <array>

#include <Eigen/Dense>

#include "hpstokes/lagrange.hpp"

namespace hpstokes {

/// Bilinear map from the reference square [0,1]^2 to a quadrilateral,
/// T(xi,eta) = a + b xi + c eta + d xi eta.  Edges are straight.
class BilinearMap {
 public:
  explicit BilinearMap(const std::array<Vec2, 4>& corners);

  Vec2 to_physical(const Vec2& ref) const;
  Eigen::Matrix2d jacobian(const Vec2& ref) const;
  double jacobian_det(const Vec2& ref) const;
  bool affine() const { return d_.squaredNorm() == 0.0; }

  /// Physical gradient from a reference gradient.
  Vec2 push_gradient(const Vec2& ref, const Vec2& ref_grad) const;

  /// Physical second derivatives from reference derivatives; includes the
  /// inverse-map curvature terms that appear for non-affine cells.
  Hess2 push_hessian(const Vec2& ref, const Vec2& ref_grad, const Hess2& ref_hess) const;

  /// Reference coordinates of a physical point (Newton; exact in one step
  /// for affine cells).  Throws if the iteration does not converge.
  Vec2 to_reference(const Vec2& physical) const;

 private:
  Vec2 a_, b_, c_, d_;
};

}  // namespace hpstokes
