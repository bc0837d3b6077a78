#include "isqa/regularizer.hpp"

#include <cmath>
#include <stdexcept>

namespace isqa {

SupportPattern manifold_of(const Vector& x) {
  SupportPattern p;
  p.dimension = x.size();
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] == 0.0) p.zero_set.push_back(static_cast<std::uint32_t>(i));
  return p;
}

L1Regularizer::L1Regularizer(double lambda) : lambda_(lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("L1Regularizer: lambda must be positive");
}

double L1Regularizer::value(const Vector& x) const {
  double s = 0.0;
  for (double v : x) s += std::fabs(v);
  return lambda_ * s;
}

namespace {
double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}
}  // namespace

Vector L1Regularizer::prox(const Vector& v, double tau) const {
  if (!(tau > 0.0)) throw std::invalid_argument("prox: tau must be positive");
  Vector out(v.size());
  const double t = tau * lambda_;
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = soft_threshold(v[i], t);
  return out;
}

Vector L1Regularizer::prox_diag(const Vector& v, const Vector& diag) const {
  if (v.size() != diag.size()) throw std::invalid_argument("prox_diag: size mismatch");
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(diag[i] > 0.0)) throw std::invalid_argument("prox_diag: nonpositive metric entry");
    out[i] = soft_threshold(v[i], lambda_ / diag[i]);
  }
  return out;
}

double L1Regularizer::prox_scalar(double v, double tau) const {
  if (!(tau > 0.0)) throw std::invalid_argument("prox_scalar: tau must be positive");
  return soft_threshold(v, tau * lambda_);
}

double L1Regularizer::stationarity_residual(const Vector& x, const Vector& g) const {
  if (x.size() != g.size())
    throw std::invalid_argument("stationarity_residual: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double r;
    if (x[i] != 0.0)
      r = g[i] + lambda_ * (x[i] > 0.0 ? 1.0 : -1.0);
    else
      r = soft_threshold(g[i], lambda_);  // clamp of g against [-lambda, lambda]
    s += r * r;
  }
  return std::sqrt(s);
}

}  // namespace isqa
