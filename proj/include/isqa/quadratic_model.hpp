#pragma once

#include <optional>

#include "isqa/hessian.hpp"
#include "isqa/linalg.hpp"
#include "isqa/regularizer.hpp"

namespace isqa {

/// The subproblem model at a base point x:
///   Q(p) = <grad, p> + 0.5 <p, H p> + Psi(x + p) - Psi(x),
/// m-strongly convex under the operator's spectral bounds. Immutable once
/// built; concurrent evaluation is safe.
struct QuadraticModel {
  Vector base;            // x^t
  Vector grad;            // grad f(x^t)
  const HessianOperator* hess = nullptr;
  const Regularizer* reg = nullptr;
  double psi_base = 0.0;  // Psi(x^t)

  QuadraticModel(Vector base_point, Vector gradient, const HessianOperator& h,
                 const Regularizer& r);

  std::size_t dim() const { return base.size(); }
  double q_value(const Vector& p) const;
  /// Smooth-part gradient of Q at p: grad + H p.
  Vector model_gradient(const Vector& p) const;
  /// One proximal gradient step on Q from p with step tau:
  ///   prox_{tau Psi}((x+p) - tau(grad + H p)) - x.
  /// Descends Q whenever tau <= 1/norm_bound.
  Vector prox_grad_step(const Vector& p, double tau) const;
  /// || p - prox_grad_step(p, tau) ||.
  double prox_grad_norm(const Vector& p, double tau) const;
  /// Min-norm element of the subdifferential of Q at p (closed form for
  /// separable regularizers only).
  double residual_min_norm(const Vector& p) const;
};

enum class StopKind { kObjectiveGap, kResidualNorm, kProxGradNorm };

/// Inner-loop stopping rule. `epsilon` is an absolute tolerance; `eta` in
/// [0,1), when positive, activates the multiplicative rule with
/// epsilon_t = eta * (-Q*) bounded from below by eta * (-Q(p)).
struct StopCriterion {
  StopKind kind = StopKind::kProxGradNorm;
  double epsilon = 0.0;
  double eta = 0.0;
};

/// Certified upper bound on Q(pbar_tau(p)) - Q*, computed from the
/// prox-gradient norm at p with tau = 1/M and the operator bounds (m, M).
double certified_gap_bound(const QuadraticModel& model, const Vector& p);

/// Evaluates the criterion at p. For the objective-gap kind the exact gap is
/// used when q_star is supplied (test oracles); otherwise the certified bound
/// above stands in for the unknowable Q*.
bool check_stop(const QuadraticModel& model, const Vector& p,
                const StopCriterion& criterion,
                std::optional<double> q_star = std::nullopt);

}  // namespace isqa
