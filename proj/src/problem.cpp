#include "isqa/problem.hpp"

#include <cmath>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <thread>

namespace isqa {

namespace {

// log(1 + exp(-z)) without overflow for large |z|.
double log1p_exp_neg(double z) {
  if (z >= 0.0) return std::log1p(std::exp(-z));
  return -z + std::log1p(std::exp(z));
}

// sigma(-z) = 1 / (1 + exp(z)), stable on both tails.
double sigmoid_neg(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

unsigned threads_from_env() {
  const char* env = std::getenv("MANIFOLD_ISQA_THREADS");
  if (!env) return 1;
  const long v = std::strtol(env, nullptr, 10);
  if (v < 1) return 1;
  return static_cast<unsigned>(std::min<long>(v, 64));
}

double power_iteration_lipschitz(const SparseDesignMatrix& a) {
  if (a.n_rows == 0 || a.n_cols == 0)
    throw std::invalid_argument("lipschitz_upper: empty matrix");
  const double frob = a.frobenius_sq();
  if (frob == 0.0) throw std::invalid_argument("lipschitz_upper: all-zero matrix");

  std::mt19937_64 rng(0x5eed5eedULL);
  Vector v(a.n_cols);
  for (double& vi : v) vi = (rng() & 1) ? 1.0 : -1.0;
  double vn = nrm2(v);
  for (double& vi : v) vi /= vn;

  Vector av, atav;
  double est = 0.0;
  bool converged = false;
  for (int it = 0; it < 100; ++it) {
    a.mul(v, av);
    a.mul_transpose(av, atav);
    const double rayleigh = dot(v, atav);
    const double w = nrm2(atav);
    if (w == 0.0) break;  // v in the nullspace; fall back to Frobenius
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = atav[i] / w;
    if (it > 0 && std::fabs(rayleigh - est) <= 1e-3 * std::fabs(rayleigh)) {
      est = rayleigh;
      converged = true;
      break;
    }
    est = rayleigh;
  }
  const double lmax_hat = converged ? std::min(1.1 * est, frob) : frob;
  return 0.25 * lmax_hat;
}

}  // namespace

LogisticProblem::LogisticProblem(SparseDesignMatrix matrix,
                                 std::vector<std::int8_t> labels, double lambda)
    : matrix_(std::move(matrix)),
      labels_(std::move(labels)),
      lambda_(lambda),
      threads_(threads_from_env()) {
  matrix_.validate();
  if (labels_.size() != matrix_.n_rows)
    throw std::invalid_argument("LogisticProblem: label count mismatch");
  for (std::int8_t b : labels_)
    if (b != 1 && b != -1) throw std::invalid_argument("LogisticProblem: label not in {-1,+1}");
  if (!(lambda_ > 0.0)) throw std::invalid_argument("LogisticProblem: lambda must be positive");
  lipschitz_ = power_iteration_lipschitz(matrix_);
}

void LogisticProblem::margins(const Vector& x, Vector& z) const {
  matrix_.mul(x, z);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] *= labels_[i];
}

double LogisticProblem::value(const Vector& x) const {
  if (x.size() != dim()) throw std::invalid_argument("f_value: dimension mismatch");
  Vector z;
  margins(x, z);
  if (threads_ <= 1 || matrix_.n_rows < 4096) {
    double f = 0.0;
    for (double zi : z) f += log1p_exp_neg(zi);
    return f;
  }
  const std::size_t n = z.size();
  const unsigned t = threads_;
  std::vector<double> partial(t, 0.0);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < t; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t lo = n * w / t, hi = n * (w + 1) / t;
      double s = 0.0;
      for (std::size_t i = lo; i < hi; ++i) s += log1p_exp_neg(z[i]);
      partial[w] = s;
    });
  }
  for (auto& th : pool) th.join();
  double f = 0.0;
  for (double p : partial) f += p;  // fixed chunk order
  return f;
}

void LogisticProblem::gradient(const Vector& x, Vector& g) const {
  if (x.size() != dim()) throw std::invalid_argument("f_grad: dimension mismatch");
  Vector z;
  margins(x, z);
  // coefficient per row: -b_i * sigma(-b_i <a_i,x>)
  for (std::size_t i = 0; i < z.size(); ++i)
    z[i] = -static_cast<double>(labels_[i]) * sigmoid_neg(z[i]);
  matrix_.mul_transpose(z, g);
}

void LogisticProblem::hess_vec(const Vector& x, const Vector& v, Vector& out) const {
  if (x.size() != dim() || v.size() != dim())
    throw std::invalid_argument("hess_vec: dimension mismatch");
  Vector z;
  margins(x, z);
  Vector av;
  matrix_.mul(v, av);
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double s = sigmoid_neg(z[i]);  // sigma(z)(1-sigma(z)) via sigma(-z)sigma(z)
    av[i] *= s * (1.0 - s);
  }
  matrix_.mul_transpose(av, out);
}

Vector LogisticProblem::hess_diagonal(const Vector& x) const {
  if (x.size() != dim()) throw std::invalid_argument("hess_diagonal: dimension mismatch");
  Vector z;
  margins(x, z);
  Vector diag(dim(), 0.0);
  for (std::size_t i = 0; i < matrix_.n_rows; ++i) {
    const double s = sigmoid_neg(z[i]);
    const double d = s * (1.0 - s);
    for (std::size_t k = matrix_.row_offsets[i]; k < matrix_.row_offsets[i + 1]; ++k)
      diag[matrix_.col_indices[k]] += d * matrix_.values[k] * matrix_.values[k];
  }
  return diag;
}

}  // namespace isqa
