#pragma once

#include <cstdint>
#include <vector>

#include "isqa/linalg.hpp"

namespace isqa {

/// Zero pattern I_x identifying the active manifold M_x = {y : y_i = 0 for i in I_x}.
/// Membership is exact-zero by contract: every prox path produces exact zeros,
/// so no tolerance is applied.
struct SupportPattern {
  std::vector<std::uint32_t> zero_set;  // sorted, unique
  std::size_t dimension = 0;

  std::size_t nnz() const { return dimension - zero_set.size(); }
  bool operator==(const SupportPattern&) const = default;
};

SupportPattern manifold_of(const Vector& x);

/// Regularizer Psi: value, proximal mappings, subgradient distance, and the
/// active-manifold pattern. Separable coordinate prox is required by the
/// coordinate-descent subsolver; only the l1 realization ships, and the
/// min-norm residual is computable in closed form for separable Psi only.
class Regularizer {
 public:
  virtual ~Regularizer() = default;

  virtual double value(const Vector& x) const = 0;
  /// prox_{tau Psi}(v); exact zeros are produced.
  virtual Vector prox(const Vector& v, double tau) const = 0;
  /// Coordinatewise prox with metric diag: tau_i = 1/diag_i.
  virtual Vector prox_diag(const Vector& v, const Vector& diag) const = 0;
  /// Scalar prox for separable Psi (1-D soft threshold for l1).
  virtual double prox_scalar(double v, double tau) const = 0;
  /// dist(0, g + dPsi(x)) — the min-norm stationarity residual.
  virtual double stationarity_residual(const Vector& x, const Vector& g) const = 0;
};

class L1Regularizer final : public Regularizer {
 public:
  explicit L1Regularizer(double lambda);

  double lambda() const { return lambda_; }

  double value(const Vector& x) const override;
  Vector prox(const Vector& v, double tau) const override;
  Vector prox_diag(const Vector& v, const Vector& diag) const override;
  double prox_scalar(double v, double tau) const override;
  double stationarity_residual(const Vector& x, const Vector& g) const override;

 private:
  double lambda_;
};

}  // namespace isqa
