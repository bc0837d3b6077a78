#include "isqa/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace isqa {

SeparableQuadratic::SeparableQuadratic(Vector curvature, Vector center)
    : c_(std::move(curvature)), a_(std::move(center)) {
  if (c_.size() != a_.size()) throw std::invalid_argument("SeparableQuadratic: size mismatch");
  for (double ci : c_)
    if (!(ci > 0.0)) throw std::invalid_argument("SeparableQuadratic: curvature must be positive");
}

double SeparableQuadratic::value(const Vector& x) const {
  double f = 0.0;
  for (std::size_t i = 0; i < c_.size(); ++i) {
    const double d = x[i] - a_[i];
    f += c_[i] * d * d;
  }
  return f;
}

void SeparableQuadratic::gradient(const Vector& x, Vector& g) const {
  g.resize(c_.size());
  for (std::size_t i = 0; i < c_.size(); ++i) g[i] = 2.0 * c_[i] * (x[i] - a_[i]);
}

void SeparableQuadratic::hess_vec(const Vector&, const Vector& v, Vector& out) const {
  out.resize(c_.size());
  for (std::size_t i = 0; i < c_.size(); ++i) out[i] = 2.0 * c_[i] * v[i];
}

Vector SeparableQuadratic::hess_diagonal(const Vector&) const {
  Vector d(c_.size());
  for (std::size_t i = 0; i < c_.size(); ++i) d[i] = 2.0 * c_[i];
  return d;
}

double SeparableQuadratic::lipschitz_upper() const {
  double m = 0.0;
  for (double ci : c_) m = std::max(m, 2.0 * ci);
  return m;
}

double SeparableQuadratic::curvature_lower() const {
  double m = 2.0 * c_[0];
  for (double ci : c_) m = std::min(m, 2.0 * ci);
  return m;
}

DenseQuadratic::DenseQuadratic(DenseMatrix p, Vector center, double eig_min,
                               double eig_max)
    : p_(std::move(p)), a_(std::move(center)), eig_min_(eig_min), eig_max_(eig_max) {
  if (p_.rows() != a_.size() || p_.cols() != a_.size())
    throw std::invalid_argument("DenseQuadratic: size mismatch");
}

double DenseQuadratic::value(const Vector& x) const {
  const Vector d = x - a_;
  return 0.5 * dot(d, p_.apply(d));
}

void DenseQuadratic::gradient(const Vector& x, Vector& g) const {
  g = p_.apply(x - a_);
}

void DenseQuadratic::hess_vec(const Vector&, const Vector& v, Vector& out) const {
  out = p_.apply(v);
}

Vector DenseQuadratic::hess_diagonal(const Vector&) const {
  Vector d(a_.size());
  for (std::size_t i = 0; i < a_.size(); ++i) d[i] = p_(i, i);
  return d;
}

QuarticTilted::QuarticTilted(Vector curvature, Vector center, double lambda)
    : c_(std::move(curvature)), a_(std::move(center)) {
  if (c_.size() != a_.size()) throw std::invalid_argument("QuarticTilted: size mismatch");
  tilt_.resize(a_.size());
  double c_min = c_[0], c_max = c_[0], a_max = 0.0, f0 = 0.0;
  for (std::size_t i = 0; i < a_.size(); ++i) {
    if (a_[i] == 0.0) throw std::invalid_argument("QuarticTilted: center must be nonzero");
    if (!(c_[i] > 0.0)) throw std::invalid_argument("QuarticTilted: curvature must be positive");
    tilt_[i] = lambda * (a_[i] > 0.0 ? 1.0 : -1.0);
    c_min = std::min(c_min, c_[i]);
    c_max = std::max(c_max, c_[i]);
    a_max = std::max(a_max, std::fabs(a_[i]));
    f0 += c_[i] * a_[i] * a_[i] * a_[i] * a_[i];
  }
  // curvature bound over the F(0)-level set (descent methods stay inside)
  const double radius = a_max + std::pow(f0 / c_min, 0.25) + 1.0;
  l_hat_ = 12.0 * c_max * radius * radius;
}

double QuarticTilted::value(const Vector& x) const {
  double f = 0.0;
  for (std::size_t i = 0; i < c_.size(); ++i) {
    const double d = x[i] - a_[i];
    f += c_[i] * d * d * d * d - tilt_[i] * x[i];
  }
  return f;
}

void QuarticTilted::gradient(const Vector& x, Vector& g) const {
  g.resize(c_.size());
  for (std::size_t i = 0; i < c_.size(); ++i) {
    const double d = x[i] - a_[i];
    g[i] = 4.0 * c_[i] * d * d * d - tilt_[i];
  }
}

void QuarticTilted::hess_vec(const Vector& x, const Vector& v, Vector& out) const {
  out.resize(c_.size());
  for (std::size_t i = 0; i < c_.size(); ++i) {
    const double d = x[i] - a_[i];
    out[i] = 12.0 * c_[i] * d * d * v[i];
  }
}

Vector QuarticTilted::hess_diagonal(const Vector& x) const {
  Vector diag(c_.size());
  for (std::size_t i = 0; i < c_.size(); ++i) {
    const double d = x[i] - a_[i];
    diag[i] = 12.0 * c_[i] * d * d;
  }
  return diag;
}

namespace {

double gaussian(std::mt19937_64& rng) {
  // Box-Muller on explicit uniforms keeps streams identical across
  // standard libraries.
  const double u1 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
  const double u2 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

DenseMatrix random_spd(std::size_t d, double eig_min, double eig_max,
                       std::mt19937_64& rng) {
  // Q from Gram-Schmidt on a Gaussian matrix, P = Q' diag(eigs) Q
  DenseMatrix q(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) q(i, j) = gaussian(rng);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      double proj = 0.0;
      for (std::size_t i = 0; i < d; ++i) proj += q(i, j) * q(i, k);
      for (std::size_t i = 0; i < d; ++i) q(i, j) -= proj * q(i, k);
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < d; ++i) norm += q(i, j) * q(i, j);
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < d; ++i) q(i, j) /= norm;
  }
  Vector eigs(d);
  eigs[0] = eig_min;
  eigs[d - 1] = eig_max;
  const double log_lo = std::log(eig_min), log_hi = std::log(eig_max);
  for (std::size_t i = 1; i + 1 < d; ++i) {
    const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
    eigs[i] = std::exp(log_lo + u * (log_hi - log_lo));
  }
  DenseMatrix p(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += q(i, k) * eigs[k] * q(j, k);
      p(i, j) = s;
    }
  // symmetrize against roundoff
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      const double s = 0.5 * (p(i, j) + p(j, i));
      p(i, j) = s;
      p(j, i) = s;
    }
  return p;
}

// Long proximal-gradient run on F = f + lambda||.||_1.
Vector prox_gradient_solve(const SmoothFunction& f, const L1Regularizer& reg,
                           Vector x, std::size_t max_iterations, double tol) {
  const double step = 1.0 / f.lipschitz_upper();
  Vector g(f.dim());
  for (std::size_t it = 0; it < max_iterations; ++it) {
    f.gradient(x, g);
    Vector u = x;
    axpy(-step, g, u);
    Vector next = reg.prox(u, step);
    f.gradient(next, g);
    if (reg.stationarity_residual(next, g) <= tol) return next;
    x = std::move(next);
  }
  return x;
}

// Exact solve of the stationarity system on a fixed support for a dense
// quadratic; returns an empty vector when the support guess is unusable.
Vector quadratic_support_solve(const DenseQuadratic& f, double lambda,
                               const Vector& approx) {
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < approx.size(); ++i)
    if (std::fabs(approx[i]) > 1e-8) support.push_back(i);
  if (support.empty()) return Vector(approx.size(), 0.0);
  const std::size_t k = support.size();
  DenseMatrix pss(k, k);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t s = 0; s < k; ++s) pss(r, s) = f.matrix()(support[r], support[s]);
  const Vector pa = f.matrix().apply(f.center());
  Vector rhs(k);
  for (std::size_t r = 0; r < k; ++r)
    rhs[r] = pa[support[r]] - lambda * (approx[support[r]] > 0.0 ? 1.0 : -1.0);
  LuFactors lu(pss);
  if (lu.singular()) return {};
  const Vector y = lu.solve(rhs);
  Vector x(approx.size(), 0.0);
  for (std::size_t r = 0; r < k; ++r) x[support[r]] = y[r];
  return x;
}

}  // namespace

SyntheticInstance example1_instance() {
  SyntheticInstance inst;
  inst.smooth = std::make_shared<SeparableQuadratic>(Vector{1.0, 1.0}, Vector{2.5, 0.3});
  inst.reg = std::make_shared<L1Regularizer>(1.0);
  inst.solution = {2.0, 0.0};
  inst.f_star = inst.problem().value(inst.solution);
  inst.sharpness = {std::sqrt(1.0), 0.5, 10.0};
  inst.name = "example1";
  return inst;
}

SyntheticInstance gen_instance(const SyntheticSpec& spec) {
  std::mt19937_64 rng(spec.seed * 0x9e3779b97f4a7c15ULL + 0xb5297a4d3f84d5b3ULL);
  SyntheticInstance inst;
  inst.reg = std::make_shared<L1Regularizer>(spec.lambda);

  switch (spec.kind) {
    case SyntheticKind::kSeparableQuadraticL1: {
      Vector c(spec.dimension), a(spec.dimension);
      for (std::size_t i = 0; i < spec.dimension; ++i) {
        c[i] = 0.5 + 2.0 * ((static_cast<double>(rng() >> 11)) * 0x1p-53);
        a[i] = 2.0 * gaussian(rng);
      }
      auto f = std::make_shared<SeparableQuadratic>(c, a);
      inst.smooth = f;
      inst.solution.resize(spec.dimension);
      for (std::size_t i = 0; i < spec.dimension; ++i) {
        const double t = spec.lambda / (2.0 * c[i]);
        inst.solution[i] = (a[i] > t) ? a[i] - t : (a[i] < -t ? a[i] + t : 0.0);
      }
      inst.f_star = inst.problem().value(inst.solution);
      double c_min = c[0];
      for (double ci : c) c_min = std::min(c_min, ci);
      inst.sharpness = {std::sqrt(c_min), 0.5, 10.0};
      inst.name = "separable-quadratic-" + std::to_string(spec.seed);
      break;
    }

    case SyntheticKind::kRandomStronglyConvexL1: {
      // retry sub-seeds until the solution is nondegenerate: interior
      // support values and a strict-complementarity margin on the zero set
      for (std::uint64_t attempt = 0;; ++attempt) {
        if (attempt > 64)
          throw std::runtime_error("gen_instance: no nondegenerate draw found");
        std::mt19937_64 sub(rng() + attempt);
        DenseMatrix p =
            random_spd(spec.dimension, spec.mu, spec.mu * spec.condition, sub);
        Vector a(spec.dimension);
        for (double& ai : a) ai = 1.5 * gaussian(sub);
        auto f = std::make_shared<DenseQuadratic>(std::move(p), std::move(a), spec.mu,
                                                  spec.mu * spec.condition);
        Vector approx = prox_gradient_solve(*f, *inst.reg,
                                            Vector(spec.dimension, 0.0), 1000000, 1e-12);
        Vector exact = quadratic_support_solve(*f, spec.lambda, approx);
        if (exact.empty()) continue;
        Vector g(spec.dimension);
        f->gradient(exact, g);
        if (inst.reg->stationarity_residual(exact, g) > 1e-12) continue;
        const std::size_t nnz = count_nonzero(exact);
        if (nnz < 3 || nnz + 3 > spec.dimension) continue;
        double support_min = 1e300, margin = 1e300;
        for (std::size_t i = 0; i < exact.size(); ++i) {
          if (exact[i] != 0.0)
            support_min = std::min(support_min, std::fabs(exact[i]));
          else
            margin = std::min(margin, spec.lambda - std::fabs(g[i]));
        }
        if (support_min < 1e-3 || margin < 0.05 * spec.lambda) continue;
        inst.smooth = f;
        inst.solution = std::move(exact);
        inst.f_star = inst.problem().value(inst.solution);
        inst.sharpness = {std::sqrt(spec.mu / 2.0), 0.5, 10.0};
        inst.name = "random-strongly-convex-" + std::to_string(spec.seed);
        break;
      }
      break;
    }

    case SyntheticKind::kDegeneratePsdL1: {
      if (spec.degenerate_power == 2) {
        // singular P = ww' gives a segment of solutions
        const double v = 2.0;
        DenseMatrix p(2, 2);
        p(0, 0) = p(0, 1) = p(1, 0) = p(1, 1) = 1.0;
        Vector a{v / 2.0, v / 2.0};  // f = 0.5 (x1 + x2 - v)^2
        auto f = std::make_shared<DenseQuadratic>(std::move(p), std::move(a), 0.0, 2.0);
        inst.smooth = f;
        inst.solution = {v - spec.lambda, 0.0};
        inst.solution_b = {0.0, v - spec.lambda};
        inst.has_segment = true;
        inst.f_star = inst.problem().value(inst.solution);
        inst.sharpness = {0.0, 0.5, 1.0};
        inst.name = "degenerate-segment";
      } else {
        Vector c{1.0, 1.0};
        Vector a{1.0, -0.7};
        auto f = std::make_shared<QuarticTilted>(c, a, spec.lambda);
        inst.smooth = f;
        inst.solution = a;
        inst.f_star = 0.0;
        // zeta from norm equivalence: (sum c d^4)^(1/4) >= c_min^(1/4) d^(-1/4) ||d||
        inst.sharpness = {std::pow(1.0 / 2.0, 0.25), 0.25, 1.0};
        inst.name = "degenerate-quartic";
      }
      break;
    }
  }

  // self-certification of the ground truth
  Vector g(inst.solution.size());
  inst.smooth->gradient(inst.solution, g);
  if (inst.reg->stationarity_residual(inst.solution, g) > 1e-12)
    throw std::runtime_error("gen_instance: ground truth failed certification");
  if (inst.has_segment) {
    inst.smooth->gradient(inst.solution_b, g);
    if (inst.reg->stationarity_residual(inst.solution_b, g) > 1e-12)
      throw std::runtime_error("gen_instance: segment endpoint failed certification");
  }
  return inst;
}

std::string make_synthetic_libsvm(std::size_t rows, std::size_t features,
                                  std::size_t nnz_per_row, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0xa0761d6478bd642fULL);
  // planted sparse weights on the first quarter of the features
  Vector w(features, 0.0);
  for (std::size_t j = 0; j < features / 4; ++j) w[j] = 2.0 * gaussian(rng);
  std::string out;
  std::vector<std::uint32_t> idx;
  for (std::size_t r = 0; r < rows; ++r) {
    idx.clear();
    while (idx.size() < nnz_per_row) {
      // skew toward low indices so some features are frequent, like a9a
      const double u = (static_cast<double>(rng() >> 11)) * 0x1p-53;
      const auto j = static_cast<std::uint32_t>(u * u * static_cast<double>(features));
      bool dup = false;
      for (std::uint32_t seen : idx) dup |= (seen == j);
      if (!dup && j < features) idx.push_back(j);
    }
    std::sort(idx.begin(), idx.end());
    double score = 0.0;
    for (std::uint32_t j : idx) score += w[j];
    const double noise = 0.5 * gaussian(rng);
    const int label = (score + noise > 0.0) ? 1 : -1;
    out += (label > 0) ? "+1" : "-1";
    for (std::uint32_t j : idx) {
      out += ' ';
      out += std::to_string(j + 1);
      out += ":1";
    }
    out += '\n';
  }
  return out;
}

}  // namespace isqa
