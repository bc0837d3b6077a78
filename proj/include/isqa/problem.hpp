#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "isqa/linalg.hpp"
#include "isqa/sparse.hpp"

namespace isqa {

/// Smooth part f of a composite objective f + Psi. Implementations must be
/// immutable after construction and safe to share across threads.
class SmoothFunction {
 public:
  virtual ~SmoothFunction() = default;

  virtual std::size_t dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual void gradient(const Vector& x, Vector& g) const = 0;
  /// Generalized Hessian-vector product at x.
  virtual void hess_vec(const Vector& x, const Vector& v, Vector& out) const = 0;
  /// Diagonal of the generalized Hessian at x.
  virtual Vector hess_diagonal(const Vector& x) const = 0;
  /// Upper bound on the gradient Lipschitz constant (over the relevant
  /// level set when no global constant exists).
  virtual double lipschitz_upper() const = 0;
  /// Lower curvature bound (0 unless the function is strongly convex).
  virtual double curvature_lower() const { return 0.0; }
};

/// l1-regularized logistic regression data: f(x) = sum_i log(1+exp(-b_i <a_i,x>)).
/// The rows a_i live in `matrix`, labels b_i in {-1,+1}, and `lambda` is the
/// weight of the l1 regularizer paired with this problem.
class LogisticProblem final : public SmoothFunction {
 public:
  LogisticProblem(SparseDesignMatrix matrix, std::vector<std::int8_t> labels,
                  double lambda);

  std::size_t dim() const override { return matrix_.n_cols; }
  std::size_t n_samples() const { return matrix_.n_rows; }
  double lambda() const { return lambda_; }
  const SparseDesignMatrix& matrix() const { return matrix_; }
  const std::vector<std::int8_t>& labels() const { return labels_; }

  double value(const Vector& x) const override;
  void gradient(const Vector& x, Vector& g) const override;
  void hess_vec(const Vector& x, const Vector& v, Vector& out) const override;
  Vector hess_diagonal(const Vector& x) const override;

  /// 0.25 * lambda_max_bound(A'A); power iteration with a fixed seed plus a
  /// 1.1 safety factor, falling back to the Frobenius bound when the power
  /// iterates have not settled. Throws on degenerate (empty or all-zero) data.
  double lipschitz_upper() const override { return lipschitz_; }

  /// Number of worker threads for the row-partitioned kernels (from
  /// MANIFOLD_ISQA_THREADS, default 1). With 1 thread the summation order is
  /// fixed and results are bitwise reproducible; with more threads results
  /// agree to relative 1e-12.
  unsigned threads() const { return threads_; }

 private:
  void margins(const Vector& x, Vector& z) const;

  SparseDesignMatrix matrix_;
  std::vector<std::int8_t> labels_;
  double lambda_;
  double lipschitz_;
  unsigned threads_;
};

}  // namespace isqa
