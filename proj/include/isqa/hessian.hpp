#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "isqa/linalg.hpp"
#include "isqa/problem.hpp"

namespace isqa {

class HessianCoordinateState;

/// Symmetric PSD quadratic-model operator H_t with documented spectral
/// bounds m_hat <= lambda(H) <= M_hat (m_hat > 0).
class HessianOperator {
 public:
  virtual ~HessianOperator() = default;

  virtual std::size_t dim() const = 0;
  virtual void apply(const Vector& v, Vector& out) const = 0;
  virtual Vector diagonal() const = 0;
  /// Upper bound on the operator norm.
  virtual double norm_bound() const = 0;
  /// Positive lower bound on the spectrum. Documented as a bound: it feeds
  /// tolerance formulas and need not be tight.
  virtual double strong_convexity_bound() const = 0;
  /// Incremental (H p)_i access for coordinate-descent subsolvers.
  virtual std::unique_ptr<HessianCoordinateState> coordinate_state() const = 0;

  Vector apply(const Vector& v) const {
    Vector out;
    apply(v, out);
    return out;
  }
};

/// Mutable per-subsolve cache tracking p and supplying (H p)_i under
/// single-coordinate updates.
class HessianCoordinateState {
 public:
  virtual ~HessianCoordinateState() = default;
  /// Re-initializes the cache at p = 0.
  virtual void reset() = 0;
  /// (H p)_i for the current p.
  virtual double hp_entry(std::size_t i) const = 0;
  /// p_i += delta.
  virtual void update(std::size_t i, double delta) = 0;
};

/// gamma * I.
class IdentityOperator final : public HessianOperator {
 public:
  IdentityOperator(std::size_t dim, double gamma);
  std::size_t dim() const override { return dim_; }
  void apply(const Vector& v, Vector& out) const override;
  Vector diagonal() const override { return Vector(dim_, gamma_); }
  double norm_bound() const override { return gamma_; }
  double strong_convexity_bound() const override { return gamma_; }
  std::unique_ptr<HessianCoordinateState> coordinate_state() const override;

 private:
  std::size_t dim_;
  double gamma_;
};

/// Safeguarded limited-memory BFGS Hessian approximation in compact form
///   B = gamma0 I - U R U',  U = [gamma0*S  Y],  R = inv([[gamma0 S'S, L],[L', -D]]),
/// with gamma0 = <y,y>/<s,y> of the latest accepted pair. A pair is accepted
/// only when <s,y> > delta <s,s>; rejected pairs are counted and skipped.
/// Spectral bounds come from the exact eigenvalues of B restricted to
/// range(U), computed from the small Gram matrices on every rebuild.
class LbfgsOperator final : public HessianOperator {
 public:
  explicit LbfgsOperator(std::size_t dim, std::size_t memory = 10,
                         double safeguard_delta = 1e-10);

  /// Returns true when the pair passed the safeguard and was stored.
  bool update(const Vector& s, const Vector& y);

  std::size_t pair_count() const { return pairs_; }
  std::size_t rejected_count() const { return rejected_; }
  double gamma0() const { return gamma0_; }

  std::size_t dim() const override { return dim_; }
  void apply(const Vector& v, Vector& out) const override;
  Vector diagonal() const override;
  double norm_bound() const override { return norm_bound_; }
  double strong_convexity_bound() const override { return convexity_bound_; }
  std::unique_ptr<HessianCoordinateState> coordinate_state() const override;

  // compact-factor access for the coordinate-descent cache
  const DenseMatrix& r_matrix() const { return r_; }
  /// u_row(j) = (gamma0 * S[j,:], Y[j,:]) of length 2*pair_count().
  void u_row(std::size_t j, Vector& out) const;

 private:
  void rebuild();

  std::size_t dim_;
  std::size_t memory_;
  double delta_;
  std::size_t pairs_ = 0;     // stored pairs, chronological order
  std::size_t rejected_ = 0;
  double gamma0_ = 1.0;
  std::vector<Vector> s_, y_;          // chronological
  DenseMatrix gram_ss_, gram_sy_, gram_yy_;
  DenseMatrix r_;                      // inverse middle matrix, 2p x 2p
  double norm_bound_ = 1.0;
  double convexity_bound_ = 1.0;
};

/// H = generalized Hessian of f at x plus damping * I, with
/// damping = c * || x - prox_Psi(x - grad f(x)) ||^rho.
class DampedNewtonOperator final : public HessianOperator {
 public:
  DampedNewtonOperator(const SmoothFunction& f, Vector x, double damping);

  double damping() const { return damping_; }
  const Vector& base() const { return x_; }

  std::size_t dim() const override { return f_->dim(); }
  void apply(const Vector& v, Vector& out) const override;
  Vector diagonal() const override;
  double norm_bound() const override { return f_->lipschitz_upper() + damping_; }
  double strong_convexity_bound() const override;
  std::unique_ptr<HessianCoordinateState> coordinate_state() const override;

 private:
  const SmoothFunction* f_;
  Vector x_;
  double damping_;
  // Populated for LogisticProblem: row-weights D and the transposed matrix
  // for the A.p caching strategy of the coordinate solver.
  Vector row_weights_;
  std::shared_ptr<const SparseDesignMatrix> a_transposed_;
  const SparseDesignMatrix* a_ = nullptr;
};

enum class EnlargementVariant {
  kScale,     // sigma <- beta*sigma, H <- H0 / sigma
  kAdditive,  // H <- H0 + (1/sigma) I, then sigma <- beta*sigma
  kDoubling,  // H <- 2 H (kScale with beta = 1/2)
};

/// Wrapper holding H = a * H0 + b * I, mutated by enlarge(); exposes the
/// updated spectral bounds.
class EnlargedOperator final : public HessianOperator {
 public:
  EnlargedOperator(const HessianOperator& base, EnlargementVariant variant,
                   double beta);

  void enlarge();
  std::size_t enlargements() const { return count_; }
  double scale() const { return a_; }
  double shift() const { return b_; }

  std::size_t dim() const override { return base_->dim(); }
  void apply(const Vector& v, Vector& out) const override;
  Vector diagonal() const override;
  double norm_bound() const override { return a_ * base_->norm_bound() + b_; }
  double strong_convexity_bound() const override {
    return a_ * base_->strong_convexity_bound() + b_;
  }
  std::unique_ptr<HessianCoordinateState> coordinate_state() const override;

 private:
  const HessianOperator* base_;
  EnlargementVariant variant_;
  double beta_;
  double sigma_ = 1.0;
  double a_ = 1.0;
  double b_ = 0.0;
  std::size_t count_ = 0;
};

}  // namespace isqa
