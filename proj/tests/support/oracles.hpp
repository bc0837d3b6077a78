// Test-only oracles, independent of the library's computation paths.
#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "isqa/linalg.hpp"

namespace oracles {

using isqa::Vector;
using isqa::operator+;
using isqa::operator-;
using isqa::operator*;

inline double uniform(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
}

inline double gauss(std::mt19937_64& rng) {
  const double u1 = uniform(rng), u2 = uniform(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

inline Vector random_vector(std::size_t d, std::mt19937_64& rng, double scale = 1.0) {
  Vector v(d);
  for (double& x : v) x = scale * gauss(rng);
  return v;
}

// Central finite-difference gradient of a scalar function.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f,
                          const Vector& x, double h = 1e-6) {
  Vector g(x.size());
  Vector xp = x, xm = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return g;
}

// Central finite-difference directional Hessian product from a gradient.
inline Vector fd_hess_vec(const std::function<Vector(const Vector&)>& grad,
                          const Vector& x, const Vector& v, double h = 1e-5) {
  Vector xp = x, xm = x;
  isqa::axpy(h, v, xp);
  isqa::axpy(-h, v, xm);
  const Vector gp = grad(xp);
  const Vector gm = grad(xm);
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (gp[i] - gm[i]) / (2.0 * h);
  return out;
}

// Dense BFGS Hessian approximation built by the textbook update
//   B <- B - (B s s' B)/(s' B s) + (y y')/(y' s),
// starting from B = gamma0 I with gamma0 from the newest pair.
inline isqa::DenseMatrix dense_bfgs(const std::vector<Vector>& s,
                                    const std::vector<Vector>& y, std::size_t d) {
  const std::size_t k = s.size();
  double gamma0 = 1.0;
  if (k > 0) gamma0 = isqa::dot(y.back(), y.back()) / isqa::dot(s.back(), y.back());
  isqa::DenseMatrix b(d, d);
  for (std::size_t i = 0; i < d; ++i) b(i, i) = gamma0;
  for (std::size_t t = 0; t < k; ++t) {
    const Vector bs = b.apply(s[t]);
    const double sbs = isqa::dot(s[t], bs);
    const double ys = isqa::dot(y[t], s[t]);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        b(i, j) += -bs[i] * bs[j] / sbs + y[t][i] * y[t][j] / ys;
  }
  return b;
}

inline double relative_error(double got, double want) {
  return std::fabs(got - want) / std::max(1.0, std::fabs(want));
}

inline double relative_error(const Vector& got, const Vector& want) {
  return isqa::nrm2(got - want) / std::max(1.0, isqa::nrm2(want));
}

}  // namespace oracles
