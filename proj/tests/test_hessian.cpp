#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "isqa/hessian.hpp"
#include "isqa/synthetic.hpp"
#include "support/oracles.hpp"

using namespace isqa;

namespace {

// safeguarded update history with a dense-recursion oracle alongside
struct History {
  LbfgsOperator op;
  std::vector<Vector> s, y;
  explicit History(std::size_t d, std::size_t memory = 10) : op(d, memory) {}
  void push(const Vector& si, const Vector& yi) {
    if (op.update(si, yi)) {
      s.push_back(si);
      y.push_back(yi);
      if (s.size() > 10) {
        s.erase(s.begin());
        y.erase(y.begin());
      }
    }
  }
};

}  // namespace

TEST_CASE("empty operator is the identity") {
  LbfgsOperator op(3);
  Vector out;
  op.apply({1.0, -2.0, 0.5}, out);
  CHECK(out == Vector{1.0, -2.0, 0.5});
  CHECK(op.gamma0() == 1.0);
  CHECK(op.diagonal() == Vector(3, 1.0));
}

TEST_CASE("single accepted pair satisfies the secant equation") {
  LbfgsOperator op(2);
  CHECK(op.update({1.0, 0.0}, {2.0, 0.0}));
  Vector out;
  op.apply({1.0, 0.0}, out);
  CHECK(out[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::fabs(out[1]) < 1e-12);

  LbfgsOperator op2(2);
  CHECK(op2.update({1.0, 0.0}, {2.0, 1.0}));
  op2.apply({1.0, 0.0}, out);
  CHECK(out[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(out[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("negative-curvature pairs are rejected by the safeguard") {
  LbfgsOperator op(2);
  CHECK_FALSE(op.update({1.0, 0.0}, {-1.0, 0.0}));
  CHECK(op.pair_count() == 0);
  CHECK(op.rejected_count() == 1);
  Vector out;
  op.apply({3.0, 0.0}, out);  // still the identity
  CHECK(out[0] == 3.0);
}

TEST_CASE("apply matches the dense BFGS recursion on random history") {
  std::mt19937_64 rng(21);
  History h(5);
  for (int k = 0; k < 8; ++k) {
    Vector s = oracles::random_vector(5, rng);
    Vector y = oracles::random_vector(5, rng);
    axpy(2.5, s, y);  // bias toward curvature so most pairs pass
    h.push(s, y);
  }
  REQUIRE(h.op.pair_count() >= 3);
  const DenseMatrix dense = oracles::dense_bfgs(h.s, h.y, 5);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector v = oracles::random_vector(5, rng);
    Vector got;
    h.op.apply(v, got);
    const Vector want = dense.apply(v);
    CHECK(oracles::relative_error(got, want) < 1e-10);
  }
}

TEST_CASE("operator is symmetric, PSD, and linear") {
  std::mt19937_64 rng(22);
  History h(6);
  for (int k = 0; k < 12; ++k) {
    Vector s = oracles::random_vector(6, rng);
    Vector y = oracles::random_vector(6, rng);
    axpy(3.0, s, y);
    h.push(s, y);
  }
  for (int trial = 0; trial < 20; ++trial) {
    const Vector u = oracles::random_vector(6, rng);
    const Vector v = oracles::random_vector(6, rng);
    Vector hu, hv;
    h.op.apply(u, hu);
    h.op.apply(v, hv);
    CHECK(std::fabs(dot(u, hv) - dot(v, hu)) < 1e-12 * (1 + nrm2(hu)) * (1 + nrm2(v)));
    CHECK(dot(v, hv) > 0.0);

    const double a = oracles::gauss(rng), b = oracles::gauss(rng);
    Vector lin(6), got(6);
    for (std::size_t i = 0; i < 6; ++i) lin[i] = a * u[i] + b * v[i];
    h.op.apply(lin, got);
    for (std::size_t i = 0; i < 6; ++i)
      CHECK(got[i] == doctest::Approx(a * hu[i] + b * hv[i]).epsilon(1e-11));
  }
}

TEST_CASE("diagonal matches the dense form and spectral bounds hold") {
  std::mt19937_64 rng(23);
  History h(5);
  for (int k = 0; k < 7; ++k) {
    Vector s = oracles::random_vector(5, rng);
    Vector y = oracles::random_vector(5, rng);
    axpy(2.0, s, y);
    h.push(s, y);
  }
  const DenseMatrix dense = oracles::dense_bfgs(h.s, h.y, 5);
  const Vector diag = h.op.diagonal();
  for (std::size_t j = 0; j < 5; ++j)
    CHECK(diag[j] == doctest::Approx(dense(j, j)).epsilon(1e-10));

  const double m_hat = h.op.strong_convexity_bound();
  const double big_m = h.op.norm_bound();
  CHECK(m_hat > 0.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector v = oracles::random_vector(5, rng);
    Vector hv;
    h.op.apply(v, hv);
    const double rayleigh = dot(v, hv) / dot(v, v);
    CHECK(rayleigh >= m_hat * (1 - 1e-9));
    CHECK(rayleigh <= big_m * (1 + 1e-9));
  }
}

TEST_CASE("ring buffer evicts the oldest pair at capacity") {
  std::mt19937_64 rng(24);
  History h(4, 3);
  for (int k = 0; k < 6; ++k) {
    Vector s = oracles::random_vector(4, rng);
    Vector y = oracles::random_vector(4, rng);
    axpy(2.0, s, y);
    h.push(s, y);
  }
  CHECK(h.op.pair_count() == 3);
  const std::vector<Vector> s_tail(h.s.end() - 3, h.s.end());
  const std::vector<Vector> y_tail(h.y.end() - 3, h.y.end());
  const DenseMatrix dense = oracles::dense_bfgs(s_tail, y_tail, 4);
  const Vector v = oracles::random_vector(4, rng);
  Vector got;
  h.op.apply(v, got);
  CHECK(oracles::relative_error(got, dense.apply(v)) < 1e-10);
}

TEST_CASE("coordinate state reproduces (H p)_i incrementally") {
  std::mt19937_64 rng(25);
  History h(6);
  for (int k = 0; k < 9; ++k) {
    Vector s = oracles::random_vector(6, rng);
    Vector y = oracles::random_vector(6, rng);
    axpy(2.5, s, y);
    h.push(s, y);
  }
  auto state = h.op.coordinate_state();
  Vector p(6, 0.0);
  for (int step = 0; step < 30; ++step) {
    const std::size_t i = rng() % 6;
    const double delta = oracles::gauss(rng);
    p[i] += delta;
    state->update(i, delta);
    Vector hp;
    h.op.apply(p, hp);
    for (std::size_t j = 0; j < 6; ++j)
      CHECK(state->hp_entry(j) == doctest::Approx(hp[j]).epsilon(1e-9));
  }
}

TEST_CASE("damped Newton applies the generalized Hessian plus damping") {
  const SyntheticInstance inst = example1_instance();
  DampedNewtonOperator op(*inst.smooth, Vector{3.0, 1.0}, 0.5);
  Vector out;
  op.apply({1.0, 2.0}, out);
  CHECK(out[0] == doctest::Approx(2.5));  // 2*1 + 0.5*1
  CHECK(out[1] == doctest::Approx(5.0));  // 2*2 + 0.5*2
  CHECK(op.diagonal() == Vector{2.5, 2.5});
  CHECK(op.strong_convexity_bound() >= 0.5);

  // damping vanishes exactly at a prox-gradient fixed point
  Vector g(2);
  inst.smooth->gradient(inst.solution, g);
  Vector u = inst.solution - g;
  const Vector moved = inst.reg->prox(u, 1.0) - inst.solution;
  CHECK(nrm2(moved) == 0.0);
}

TEST_CASE("damped Newton at zero matches the quarter Gram diagonal") {
  const LibsvmData data = parse_libsvm("+1 1:1 2:2\n-1 2:1 3:-1");
  const LogisticProblem prob(data.matrix, data.labels, 1.0);
  DampedNewtonOperator op(prob, Vector(3, 0.0), 0.125);
  const Vector diag = op.diagonal();
  CHECK(diag[0] == doctest::Approx(0.25 * 1.0 + 0.125));
  CHECK(diag[1] == doctest::Approx(0.25 * 5.0 + 0.125));
  CHECK(diag[2] == doctest::Approx(0.25 * 1.0 + 0.125));
}

TEST_CASE("newton coordinate state uses the transposed-column cache") {
  const LibsvmData data = parse_libsvm("+1 1:1 2:2\n-1 2:1 3:-1\n+1 1:-2 3:1");
  const LogisticProblem prob(data.matrix, data.labels, 1.0);
  std::mt19937_64 rng(26);
  const Vector x = oracles::random_vector(3, rng, 0.4);
  DampedNewtonOperator op(prob, x, 0.01);
  auto state = op.coordinate_state();
  Vector p(3, 0.0);
  for (int step = 0; step < 20; ++step) {
    const std::size_t i = rng() % 3;
    const double delta = oracles::gauss(rng);
    p[i] += delta;
    state->update(i, delta);
    Vector hp;
    op.apply(p, hp);
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(state->hp_entry(j) == doctest::Approx(hp[j]).epsilon(1e-10));
  }
}

TEST_CASE("enlargement variants scale and shift as specified") {
  IdentityOperator base(3, 1.0);

  EnlargedOperator additive(base, EnlargementVariant::kAdditive, 0.5);
  additive.enlarge();
  Vector out;
  additive.apply({1.0, 0.0, 0.0}, out);
  CHECK(out[0] == doctest::Approx(2.0));  // H0 + I
  additive.enlarge();
  additive.apply({1.0, 0.0, 0.0}, out);
  CHECK(out[0] == doctest::Approx(3.0));  // H0 + 2I

  EnlargedOperator doubling(base, EnlargementVariant::kDoubling, 0.5);
  doubling.enlarge();
  doubling.enlarge();
  doubling.enlarge();
  doubling.apply({1.0, 0.0, 0.0}, out);
  CHECK(out[0] == doctest::Approx(8.0));  // 8 H0
  CHECK(doubling.norm_bound() == doctest::Approx(8.0));

  EnlargedOperator scale(base, EnlargementVariant::kScale, 0.5);
  scale.enlarge();
  scale.apply({1.0, 0.0, 0.0}, out);
  CHECK(out[0] == doctest::Approx(2.0));  // H0 / beta
}

TEST_CASE("scale-variant enlargement accepts the unit step within the bound") {
  // quadratic f with known curvature: once H >= L the unit step passes Armijo
  const Vector c{2.0, 0.5};
  SeparableQuadratic f(c, Vector{1.0, -2.0});  // L = 4
  L1Regularizer reg(0.1);
  const double l = f.lipschitz_upper();
  IdentityOperator base(2, 0.125);  // m0 = 0.125, L/m0 = 32
  EnlargedOperator h(base, EnlargementVariant::kScale, 0.5);

  const Vector x{3.0, 3.0};
  Vector g(2);
  f.gradient(x, g);
  const double f_x = f.value(x) + reg.value(x);
  const std::size_t lemma_bound =
      static_cast<std::size_t>(std::ceil(std::log(l / 0.125) / std::log(2.0)));
  std::size_t rounds = 0;
  while (true) {
    QuadraticModel model(x, g, h, reg);
    // exact subproblem solve for the scaled-identity metric
    const Vector p = model.prox_grad_step(Vector(2, 0.0), 1.0 / h.norm_bound());
    const double q = model.q_value(p);
    REQUIRE(q < 0.0);
    Vector trial = x + p;
    if (f.value(trial) + reg.value(trial) <= f_x + 1e-4 * q) break;
    h.enlarge();
    ++rounds;
    REQUIRE(rounds <= lemma_bound);
  }
  CHECK(rounds <= lemma_bound);
}
