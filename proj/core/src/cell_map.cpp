#include "hpstokes/cell_map.hpp"

#include <stdexcept>

namespace hpstokes {

BilinearMap::BilinearMap(const std::array<Vec2, 4>& v) {
  // Corner order (0,0), (1,0), (1,1), (0,1).
  a_ = v[0];
  b_ = v[1] - v[0];
  c_ = v[3] - v[0];
  d_ = v[2] - v[1] - v[3] + v[0];
}

Vec2 BilinearMap::to_physical(const Vec2& r) const {
  return a_ + r.x() * b_ + r.y() * c_ + r.x() * r.y() * d_;
}

Eigen::Matrix2d BilinearMap::jacobian(const Vec2& r) const {
  Eigen::Matrix2d J;
  J.col(0) = b_ + r.y() * d_;  // dx/dxi
  J.col(1) = c_ + r.x() * d_;  // dx/deta
  return J;
}

double BilinearMap::jacobian_det(const Vec2& r) const { return jacobian(r).determinant(); }

Vec2 BilinearMap::push_gradient(const Vec2& r, const Vec2& ref_grad) const {
  return jacobian(r).transpose().inverse() * ref_grad;
}

Hess2 BilinearMap::push_hessian(const Vec2& r, const Vec2& ref_grad, const Hess2& ref_hess) const {
  const Eigen::Matrix2d J = jacobian(r);
  const Eigen::Matrix2d Jinv = J.inverse();
  const Vec2 phys_grad = J.transpose().inverse() * ref_grad;
  // H_ref = J^T H_x J + sum_k (d^2 x_k / dref^2) (dphi/dx_k); the only
  // nonzero reference second derivative of a bilinear map is the mixed one.
  Eigen::Matrix2d H_ref;
  H_ref << ref_hess.xx, ref_hess.xy, ref_hess.xy, ref_hess.yy;
  const double mixed = d_.dot(phys_grad);
  H_ref(0, 1) -= mixed;
  H_ref(1, 0) -= mixed;
  const Eigen::Matrix2d H = Jinv.transpose() * H_ref * Jinv;
  return Hess2{H(0, 0), 0.5 * (H(0, 1) + H(1, 0)), H(1, 1)};
}

Vec2 BilinearMap::to_reference(const Vec2& x) const {
  Vec2 r(0.5, 0.5);
  for (int it = 0; it < 50; ++it) {
    const Vec2 res = to_physical(r) - x;
    if (res.norm() < 1e-14 * (1.0 + x.norm())) return r;
    r -= jacobian(r).inverse() * res;
  }
  const Vec2 res = to_physical(r) - x;
  if (res.norm() < 1e-10 * (1.0 + x.norm())) return r;
  throw std::runtime_error("BilinearMap::to_reference: Newton iteration failed");
}

}  // namespace hpstokes
