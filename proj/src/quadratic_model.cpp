#include "isqa/quadratic_model.hpp"

#include <cmath>
#include <stdexcept>

namespace isqa {

QuadraticModel::QuadraticModel(Vector base_point, Vector gradient,
                               const HessianOperator& h, const Regularizer& r)
    : base(std::move(base_point)), grad(std::move(gradient)), hess(&h), reg(&r) {
  if (base.size() != grad.size() || base.size() != hess->dim())
    throw std::invalid_argument("QuadraticModel: dimension mismatch");
  psi_base = reg->value(base);
}

double QuadraticModel::q_value(const Vector& p) const {
  Vector hp;
  hess->apply(p, hp);
  return dot(grad, p) + 0.5 * dot(p, hp) + reg->value(base + p) - psi_base;
}

Vector QuadraticModel::model_gradient(const Vector& p) const {
  Vector g;
  hess->apply(p, g);
  axpy(1.0, grad, g);
  return g;
}

Vector QuadraticModel::prox_grad_step(const Vector& p, double tau) const {
  if (!(tau > 0.0)) throw std::invalid_argument("prox_grad_step: tau must be positive");
  Vector u = model_gradient(p);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = base[i] + p[i] - tau * u[i];
  Vector out = reg->prox(u, tau);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= base[i];
  return out;
}

double QuadraticModel::prox_grad_norm(const Vector& p, double tau) const {
  return nrm2(p - prox_grad_step(p, tau));
}

double QuadraticModel::residual_min_norm(const Vector& p) const {
  return reg->stationarity_residual(base + p, model_gradient(p));
}

double certified_gap_bound(const QuadraticModel& model, const Vector& p) {
  const double m = model.hess->strong_convexity_bound();
  const double big_m = model.hess->norm_bound();
  const double tau = 1.0 / big_m;
  const double g = model.prox_grad_norm(p, tau);
  const double k = (2.0 / m + tau) * (1.0 + big_m * tau) / tau - 0.5;
  return k * g * g / tau;
}

bool check_stop(const QuadraticModel& model, const Vector& p,
                const StopCriterion& criterion, std::optional<double> q_star) {
  if (criterion.epsilon < 0.0)
    throw std::invalid_argument("check_stop: negative tolerance");
  if (criterion.eta < 0.0 || criterion.eta >= 1.0)
    throw std::invalid_argument("check_stop: eta must lie in [0,1)");
  double eps = criterion.epsilon;
  if (criterion.eta > 0.0) {
    const double neg_qstar_lb =
        q_star ? std::max(0.0, -*q_star) : std::max(0.0, -model.q_value(p));
    eps = std::max(eps, criterion.eta * neg_qstar_lb);
  }
  switch (criterion.kind) {
    case StopKind::kObjectiveGap: {
      const double gap =
          q_star ? model.q_value(p) - *q_star : certified_gap_bound(model, p);
      return gap <= eps;
    }
    case StopKind::kResidualNorm:
      return model.residual_min_norm(p) <= eps;
    case StopKind::kProxGradNorm:
      return model.prox_grad_norm(p, 1.0 / model.hess->norm_bound()) <= eps;
  }
  return false;
}

}  // namespace isqa
