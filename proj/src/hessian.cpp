#include "isqa/hessian.hpp"

#include <cmath>
#include <stdexcept>

namespace isqa {

namespace {

class TrackedCoordinateState : public HessianCoordinateState {
 public:
  explicit TrackedCoordinateState(std::size_t dim) : p_(dim, 0.0) {}
  void reset() override { p_.assign(p_.size(), 0.0); }

 protected:
  Vector p_;
};

class IdentityCoordinateState final : public TrackedCoordinateState {
 public:
  IdentityCoordinateState(std::size_t dim, double gamma)
      : TrackedCoordinateState(dim), gamma_(gamma) {}
  double hp_entry(std::size_t i) const override { return gamma_ * p_[i]; }
  void update(std::size_t i, double delta) override { p_[i] += delta; }

 private:
  double gamma_;
};

}  // namespace

IdentityOperator::IdentityOperator(std::size_t dim, double gamma)
    : dim_(dim), gamma_(gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("IdentityOperator: gamma must be positive");
}

void IdentityOperator::apply(const Vector& v, Vector& out) const {
  if (v.size() != dim_) throw std::invalid_argument("IdentityOperator::apply: size mismatch");
  out = v;
  scal(gamma_, out);
}

std::unique_ptr<HessianCoordinateState> IdentityOperator::coordinate_state() const {
  return std::make_unique<IdentityCoordinateState>(dim_, gamma_);
}

// ---------------------------------------------------------------------------
// LbfgsOperator

LbfgsOperator::LbfgsOperator(std::size_t dim, std::size_t memory, double safeguard_delta)
    : dim_(dim), memory_(memory), delta_(safeguard_delta) {
  if (memory_ == 0) throw std::invalid_argument("LbfgsOperator: memory must be >= 1");
  if (!(delta_ > 0.0)) throw std::invalid_argument("LbfgsOperator: safeguard must be positive");
}

bool LbfgsOperator::update(const Vector& s, const Vector& y) {
  if (s.size() != dim_ || y.size() != dim_)
    throw std::invalid_argument("LbfgsOperator::update: size mismatch");
  const double sy = dot(s, y);
  const double ss = dot(s, s);
  if (!(sy > delta_ * ss) || ss == 0.0) {
    ++rejected_;
    return false;
  }
  if (pairs_ == memory_) {
    s_.erase(s_.begin());
    y_.erase(y_.begin());
    --pairs_;
  }
  s_.push_back(s);
  y_.push_back(y);
  ++pairs_;
  gamma0_ = dot(y, y) / sy;
  rebuild();
  return true;
}

void LbfgsOperator::rebuild() {
  const std::size_t p = pairs_;
  gram_ss_ = DenseMatrix(p, p);
  gram_sy_ = DenseMatrix(p, p);
  gram_yy_ = DenseMatrix(p, p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) {
      gram_ss_(i, j) = dot(s_[i], s_[j]);
      gram_sy_(i, j) = dot(s_[i], y_[j]);
      gram_yy_(i, j) = dot(y_[i], y_[j]);
    }

  // middle matrix [[gamma0 S'S, L],[L', -D]] with L strictly lower in
  // chronological order, D = diag(s_i' y_i)
  const std::size_t q = 2 * p;
  DenseMatrix mid(q, q);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) mid(i, j) = gamma0_ * gram_ss_(i, j);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) {
      const double lij = (i > j) ? gram_sy_(i, j) : 0.0;
      mid(i, p + j) = lij;
      mid(p + j, i) = lij;
    }
  for (std::size_t i = 0; i < p; ++i) mid(p + i, p + i) = -gram_sy_(i, i);
  r_ = LuFactors(mid).inverse();

  // Spectral bounds of B = gamma0 I - U R U': nonzero eigenvalues of U R U'
  // equal those of Lh^{1/2} (V' R V) Lh^{1/2} where U'U = V Lh V'.
  DenseMatrix g(q, q);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) {
      g(i, j) = gamma0_ * gamma0_ * gram_ss_(i, j);
      g(i, p + j) = gamma0_ * gram_sy_(i, j);
      g(p + j, i) = gamma0_ * gram_sy_(i, j);
      g(p + i, p + j) = gram_yy_(i, j);
    }
  const SymmetricEigen ge = symmetric_eigen(g);
  DenseMatrix c(q, q);  // columns scaled by sqrt(max(eig,0))
  for (std::size_t j = 0; j < q; ++j) {
    const double root = std::sqrt(std::max(ge.values[j], 0.0));
    for (std::size_t i = 0; i < q; ++i) c(i, j) = ge.vectors(i, j) * root;
  }
  const DenseMatrix small = c.transpose().multiply(r_.multiply(c));
  const SymmetricEigen se = symmetric_eigen(small);
  const double wmin = se.values.front();
  const double wmax = se.values.back();
  norm_bound_ = gamma0_ + std::max(0.0, -wmin);
  convexity_bound_ = std::max(gamma0_ - wmax, 1e-12 * gamma0_);
}

void LbfgsOperator::u_row(std::size_t j, Vector& out) const {
  out.resize(2 * pairs_);
  for (std::size_t k = 0; k < pairs_; ++k) {
    out[k] = gamma0_ * s_[k][j];
    out[pairs_ + k] = y_[k][j];
  }
}

void LbfgsOperator::apply(const Vector& v, Vector& out) const {
  if (v.size() != dim_) throw std::invalid_argument("LbfgsOperator::apply: size mismatch");
  out = v;
  scal(gamma0_, out);
  if (pairs_ == 0) return;
  const std::size_t p = pairs_;
  Vector utv(2 * p);
  for (std::size_t k = 0; k < p; ++k) {
    utv[k] = gamma0_ * dot(s_[k], v);
    utv[p + k] = dot(y_[k], v);
  }
  const Vector rutv = r_.apply(utv);
  for (std::size_t k = 0; k < p; ++k) {
    axpy(-gamma0_ * rutv[k], s_[k], out);
    axpy(-rutv[p + k], y_[k], out);
  }
}

Vector LbfgsOperator::diagonal() const {
  Vector diag(dim_, gamma0_);
  if (pairs_ == 0) return diag;
  Vector u, ru;
  for (std::size_t j = 0; j < dim_; ++j) {
    u_row(j, u);
    ru = r_.apply(u);
    diag[j] -= dot(u, ru);
  }
  return diag;
}

namespace {

class LbfgsCoordinateState final : public TrackedCoordinateState {
 public:
  explicit LbfgsCoordinateState(const LbfgsOperator& op)
      : TrackedCoordinateState(op.dim()), op_(&op), cache_(2 * op.pair_count(), 0.0) {}

  void reset() override {
    TrackedCoordinateState::reset();
    cache_.assign(cache_.size(), 0.0);
  }

  // (H p)_i = gamma0 p_i - u_i' (R U' p); cache_ = R U' p.
  double hp_entry(std::size_t i) const override {
    double s = op_->gamma0() * p_[i];
    if (!cache_.empty()) {
      op_->u_row(i, scratch_);
      s -= dot(scratch_, cache_);
    }
    return s;
  }

  void update(std::size_t i, double delta) override {
    p_[i] += delta;
    if (cache_.empty()) return;
    op_->u_row(i, scratch_);
    const Vector ru = op_->r_matrix().apply(scratch_);
    axpy(delta, ru, cache_);
  }

 private:
  const LbfgsOperator* op_;
  Vector cache_;
  mutable Vector scratch_;
};

}  // namespace

std::unique_ptr<HessianCoordinateState> LbfgsOperator::coordinate_state() const {
  return std::make_unique<LbfgsCoordinateState>(*this);
}

// ---------------------------------------------------------------------------
// DampedNewtonOperator

DampedNewtonOperator::DampedNewtonOperator(const SmoothFunction& f, Vector x,
                                           double damping)
    : f_(&f), x_(std::move(x)), damping_(damping) {
  if (damping_ < 0.0) throw std::invalid_argument("DampedNewtonOperator: negative damping");
  if (x_.size() != f_->dim())
    throw std::invalid_argument("DampedNewtonOperator: dimension mismatch");
  if (const auto* logistic = dynamic_cast<const LogisticProblem*>(f_)) {
    a_ = &logistic->matrix();
    Vector z;
    a_->mul(x_, z);
    row_weights_.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double m = static_cast<double>(logistic->labels()[i]) * z[i];
      const double s = m >= 0.0 ? std::exp(-m) / (1.0 + std::exp(-m))
                                : 1.0 / (1.0 + std::exp(m));
      row_weights_[i] = s * (1.0 - s);
    }
    a_transposed_ = std::make_shared<SparseDesignMatrix>(a_->transposed());
  }
}

void DampedNewtonOperator::apply(const Vector& v, Vector& out) const {
  f_->hess_vec(x_, v, out);
  if (damping_ != 0.0) axpy(damping_, v, out);
}

Vector DampedNewtonOperator::diagonal() const {
  Vector diag = f_->hess_diagonal(x_);
  for (double& d : diag) d += damping_;
  return diag;
}

double DampedNewtonOperator::strong_convexity_bound() const {
  const double m = f_->curvature_lower() + damping_;
  return std::max(m, 1e-16 * norm_bound());
}

namespace {

// Maintains z = A p so that (H p)_i = col_i(A)' (D z) + damping * p_i.
class NewtonCoordinateState final : public TrackedCoordinateState {
 public:
  NewtonCoordinateState(const SmoothFunction& f, const Vector& x, double damping,
                        const SparseDesignMatrix* a,
                        std::shared_ptr<const SparseDesignMatrix> at,
                        const Vector* weights)
      : TrackedCoordinateState(f.dim()),
        f_(&f),
        x_(&x),
        damping_(damping),
        a_(a),
        at_(std::move(at)),
        weights_(weights) {
    if (a_) z_.assign(a_->n_rows, 0.0);
  }

  void reset() override {
    TrackedCoordinateState::reset();
    if (a_) z_.assign(a_->n_rows, 0.0);
  }

  double hp_entry(std::size_t i) const override {
    if (a_) {
      double s = 0.0;
      const auto& t = *at_;
      for (std::size_t k = t.row_offsets[i]; k < t.row_offsets[i + 1]; ++k)
        s += t.values[k] * (*weights_)[t.col_indices[k]] * z_[t.col_indices[k]];
      return s + damping_ * p_[i];
    }
    // generic fallback: one Hessian-vector product per query
    Vector hv;
    f_->hess_vec(*x_, p_, hv);
    return hv[i] + damping_ * p_[i];
  }

  void update(std::size_t i, double delta) override {
    p_[i] += delta;
    if (!a_) return;
    const auto& t = *at_;
    for (std::size_t k = t.row_offsets[i]; k < t.row_offsets[i + 1]; ++k)
      z_[t.col_indices[k]] += delta * t.values[k];
  }

 private:
  const SmoothFunction* f_;
  const Vector* x_;
  double damping_;
  const SparseDesignMatrix* a_;
  std::shared_ptr<const SparseDesignMatrix> at_;
  const Vector* weights_;
  Vector z_;
};

}  // namespace

std::unique_ptr<HessianCoordinateState> DampedNewtonOperator::coordinate_state() const {
  return std::make_unique<NewtonCoordinateState>(*f_, x_, damping_, a_, a_transposed_,
                                                 &row_weights_);
}

// ---------------------------------------------------------------------------
// EnlargedOperator

EnlargedOperator::EnlargedOperator(const HessianOperator& base,
                                   EnlargementVariant variant, double beta)
    : base_(&base), variant_(variant), beta_(beta) {
  if (!(beta > 0.0 && beta < 1.0))
    throw std::invalid_argument("EnlargedOperator: beta must be in (0,1)");
}

void EnlargedOperator::enlarge() {
  ++count_;
  switch (variant_) {
    case EnlargementVariant::kScale:
      sigma_ *= beta_;
      a_ = 1.0 / sigma_;
      break;
    case EnlargementVariant::kDoubling:
      a_ *= 2.0;
      break;
    case EnlargementVariant::kAdditive:
      b_ = 1.0 / sigma_;
      sigma_ *= beta_;
      break;
  }
}

void EnlargedOperator::apply(const Vector& v, Vector& out) const {
  base_->apply(v, out);
  if (a_ != 1.0) scal(a_, out);
  if (b_ != 0.0) axpy(b_, v, out);
}

Vector EnlargedOperator::diagonal() const {
  Vector diag = base_->diagonal();
  for (double& d : diag) d = a_ * d + b_;
  return diag;
}

namespace {

class EnlargedCoordinateState final : public HessianCoordinateState {
 public:
  EnlargedCoordinateState(std::unique_ptr<HessianCoordinateState> inner, double a,
                          double b, std::size_t dim)
      : inner_(std::move(inner)), a_(a), b_(b), p_(dim, 0.0) {}

  void reset() override {
    inner_->reset();
    p_.assign(p_.size(), 0.0);
  }
  double hp_entry(std::size_t i) const override {
    return a_ * inner_->hp_entry(i) + b_ * p_[i];
  }
  void update(std::size_t i, double delta) override {
    inner_->update(i, delta);
    p_[i] += delta;
  }

 private:
  std::unique_ptr<HessianCoordinateState> inner_;
  double a_, b_;
  Vector p_;
};

}  // namespace

std::unique_ptr<HessianCoordinateState> EnlargedOperator::coordinate_state() const {
  return std::make_unique<EnlargedCoordinateState>(base_->coordinate_state(), a_, b_,
                                                   dim());
}

}  // namespace isqa
