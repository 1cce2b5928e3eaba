#include "hpstokes/lagrange.hpp"

#include <map>
#include <mutex>
#include <stdexcept>

namespace hpstokes {

Lagrange1D::Lagrange1D(int degree) : degree_(degree), nodes_(gauss_lobatto_points(degree)) {
  const int n = degree_ + 1;
  scale_.resize(n);
  for (int i = 0; i < n; ++i) {
    double w = 1.0;
    for (int j = 0; j < n; ++j) {
      if (j != i) w *= nodes_[i] - nodes_[j];
    }
    scale_[i] = 1.0 / w;
  }
}

void Lagrange1D::eval(double x, double* val, double* d1, double* d2) const {
  const int n = degree_ + 1;
  // Product accumulation: v = prod (x-x_j), d = v', s = v''; no divisions,
  // so the evaluation stays exact at the interpolation nodes.
  for (int i = 0; i < n; ++i) {
    double v = 1.0, d = 0.0, s = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double t = x - nodes_[j];
      s = s * t + 2.0 * d;
      d = d * t + v;
      v *= t;
    }
    val[i] = scale_[i] * v;
    if (d1) d1[i] = scale_[i] * d;
    if (d2) d2[i] = scale_[i] * s;
  }
}

const Lagrange1D& lagrange_basis(int degree) {
  static std::mutex mutex;
  static std::map<int, Lagrange1D> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(degree);
  if (it == cache.end()) it = cache.emplace(degree, Lagrange1D(degree)).first;
  return it->second;
}

void tensor_shape_values(int degree, const Vec2& x, std::vector<double>& val,
                         std::vector<Vec2>* grad, std::vector<Hess2>* hess) {
  if (degree < 1) throw std::invalid_argument("tensor_shape_values: degree must be >= 1");
  const Lagrange1D& basis = lagrange_basis(degree);
  const int n = degree + 1;
  std::vector<double> vx(n), vy(n), dx(n), dy(n), sx(n), sy(n);
  const bool need_d1 = grad != nullptr || hess != nullptr;
  const bool need_d2 = hess != nullptr;
  basis.eval(x.x(), vx.data(), need_d1 ? dx.data() : nullptr, need_d2 ? sx.data() : nullptr);
  basis.eval(x.y(), vy.data(), need_d1 ? dy.data() : nullptr, need_d2 ? sy.data() : nullptr);

  val.resize(n * n);
  if (grad) grad->resize(n * n);
  if (hess) hess->resize(n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int k = i + j * n;
      val[k] = vx[i] * vy[j];
      if (grad) (*grad)[k] = Vec2(dx[i] * vy[j], vx[i] * dy[j]);
      if (hess) (*hess)[k] = Hess2{sx[i] * vy[j], dx[i] * dy[j], vx[i] * sy[j]};
    }
  }
}

Vec2 tensor_node(int degree, int k) {
  const Lagrange1D& basis = lagrange_basis(degree);
  const int n = degree + 1;
  return Vec2(basis.nodes()[k % n], basis.nodes()[k / n]);
}

const BasisTable& basis_table(int degree, int n_1d) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, BasisTable> cache;
  std::lock_guard<std::mutex> lock(mutex);
  const auto key = std::make_pair(degree, n_1d);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  const Quadrature2D& rule = gauss_legendre_2d(n_1d);
  BasisTable table;
  table.degree = degree;
  table.n_points = rule.size();
  table.n_basis = (degree + 1) * (degree + 1);
  const int nb = table.n_basis;
  table.val.resize(table.n_points * nb);
  table.dxi.resize(table.n_points * nb);
  table.deta.resize(table.n_points * nb);
  table.dxx.resize(table.n_points * nb);
  table.dxy.resize(table.n_points * nb);
  table.dyy.resize(table.n_points * nb);

  std::vector<double> v;
  std::vector<Vec2> g;
  std::vector<Hess2> h;
  for (int q = 0; q < table.n_points; ++q) {
    tensor_shape_values(degree, rule.points[q], v, &g, &h);
    for (int b = 0; b < nb; ++b) {
      table.val[q * nb + b] = v[b];
      table.dxi[q * nb + b] = g[b].x();
      table.deta[q * nb + b] = g[b].y();
      table.dxx[q * nb + b] = h[b].xx;
      table.dxy[q * nb + b] = h[b].xy;
      table.dyy[q * nb + b] = h[b].yy;
    }
  }
  return cache.emplace(key, std::move(table)).first->second;
}

}  // namespace hpstokes
