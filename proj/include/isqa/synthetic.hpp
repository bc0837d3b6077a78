#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "isqa/linalg.hpp"
#include "isqa/outer_loop.hpp"
#include "isqa/problem.hpp"
#include "isqa/regularizer.hpp"

namespace isqa {

/// f(x) = sum_i c_i (x_i - a_i)^2.
class SeparableQuadratic final : public SmoothFunction {
 public:
  SeparableQuadratic(Vector curvature, Vector center);
  std::size_t dim() const override { return c_.size(); }
  double value(const Vector& x) const override;
  void gradient(const Vector& x, Vector& g) const override;
  void hess_vec(const Vector& x, const Vector& v, Vector& out) const override;
  Vector hess_diagonal(const Vector& x) const override;
  double lipschitz_upper() const override;
  double curvature_lower() const override;

 private:
  Vector c_, a_;
};

/// f(x) = 0.5 (x-a)' P (x-a) with dense symmetric PSD P.
class DenseQuadratic final : public SmoothFunction {
 public:
  DenseQuadratic(DenseMatrix p, Vector center, double eig_min, double eig_max);
  std::size_t dim() const override { return a_.size(); }
  double value(const Vector& x) const override;
  void gradient(const Vector& x, Vector& g) const override;
  void hess_vec(const Vector& x, const Vector& v, Vector& out) const override;
  Vector hess_diagonal(const Vector& x) const override;
  double lipschitz_upper() const override { return eig_max_; }
  double curvature_lower() const override { return eig_min_; }
  const DenseMatrix& matrix() const { return p_; }
  const Vector& center() const { return a_; }

 private:
  DenseMatrix p_;
  Vector a_;
  double eig_min_, eig_max_;
};

/// f(x) = sum_i c_i (x_i - a_i)^4 - g_i x_i with g_i = lambda * sign(a_i).
/// Convex, with a generalized Hessian that is singular at the minimizer, so
/// paired with lambda||.||_1 the composite satisfies the sharpness condition
/// with theta = 1/4 at the solution x* = a.
class QuarticTilted final : public SmoothFunction {
 public:
  QuarticTilted(Vector curvature, Vector center, double lambda);
  std::size_t dim() const override { return c_.size(); }
  double value(const Vector& x) const override;
  void gradient(const Vector& x, Vector& g) const override;
  void hess_vec(const Vector& x, const Vector& v, Vector& out) const override;
  Vector hess_diagonal(const Vector& x) const override;
  double lipschitz_upper() const override { return l_hat_; }

 private:
  Vector c_, a_, tilt_;
  double l_hat_;
};

enum class SyntheticKind {
  kSeparableQuadraticL1,
  kRandomStronglyConvexL1,
  kDegeneratePsdL1,
};

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::kRandomStronglyConvexL1;
  std::size_t dimension = 30;
  double mu = 1.0;         // smallest eigenvalue of P (random family)
  double condition = 10.0; // eig_max / eig_min
  double lambda = 1.0;
  std::uint64_t seed = 0;
  int degenerate_power = 4;  // 4: quartic (theta = 1/4); 2: singular P segment
};

struct Sharpness {
  double zeta = 0.0;
  double theta = 0.5;
  double xi = 1.0;
};

struct SyntheticInstance {
  std::shared_ptr<SmoothFunction> smooth;
  std::shared_ptr<L1Regularizer> reg;
  Vector solution;       // certified: stationarity residual < 1e-12
  double f_star = 0.0;
  Sharpness sharpness;
  bool has_segment = false;
  Vector solution_b;     // second endpoint when the solution set is a segment
  std::string name;

  CompositeProblem problem() const { return {smooth.get(), reg.get()}; }
};

/// Builds an instance with certified ground truth. Throws if the
/// self-certification (stationarity residual < 1e-12) fails.
SyntheticInstance gen_instance(const SyntheticSpec& spec);

/// The two-dimensional instance min (x1-2.5)^2 + (x2-0.3)^2 + ||x||_1 with
/// unique solution (2, 0).
SyntheticInstance example1_instance();

/// Deterministic LIBSVM-format classification data with binary features
/// (a9a-shaped): labels from a sparse planted weight vector.
std::string make_synthetic_libsvm(std::size_t rows, std::size_t features,
                                  std::size_t nnz_per_row, std::uint64_t seed);

}  // namespace isqa
