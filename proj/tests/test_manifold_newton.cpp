#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "isqa/manifold_newton.hpp"
#include "isqa/synthetic.hpp"
#include "isqa/verify.hpp"
#include "support/oracles.hpp"

using namespace isqa;

TEST_CASE("chart collects free coordinates and signs") {
  const Chart chart = make_chart({2.0, 0.0, -1.0, 0.0});
  CHECK(chart.free_indices == std::vector<std::uint32_t>{0, 2});
  CHECK(chart.base_signs == std::vector<std::int8_t>{1, -1});
  CHECK(chart.dim() == 2);
  const Vector y = restrict_to_chart(chart, {2.0, 9.0, -1.0, 9.0});
  CHECK(y == Vector{2.0, -1.0});
  const Vector back = embed_from_chart(chart, y);
  CHECK(back == Vector{2.0, 0.0, -1.0, 0.0});
}

TEST_CASE("chart gradient vanishes at the 2-d instance solution") {
  const SyntheticInstance inst = example1_instance();
  const Chart chart = make_chart(inst.solution);  // free = {0}
  REQUIRE(chart.dim() == 1);
  const Vector g = chart_gradient(*inst.smooth, *inst.reg, chart, {2.0});
  CHECK(g[0] == doctest::Approx(0.0).epsilon(1e-15));  // 2(2-2.5) + 1
}

TEST_CASE("chart gradient adds the sign vector of the current point") {
  SeparableQuadratic f(Vector{1.0, 1.0}, Vector{0.0, 0.0});
  L1Regularizer reg(1.0);
  Chart chart;
  chart.full_dim = 2;
  chart.free_indices = {0, 1};
  chart.base_signs = {1, -1};
  const Vector g = chart_gradient(f, reg, chart, {3.0, -2.0});
  CHECK(g[0] == doctest::Approx(2.0 * 3.0 + 1.0));
  CHECK(g[1] == doctest::Approx(2.0 * -2.0 - 1.0));
  CHECK_THROWS_AS(chart_gradient(f, reg, chart, {0.0, -2.0}), ChartDegenerate);
}

TEST_CASE("chart gradient matches finite differences of the restricted objective") {
  SyntheticSpec spec;
  spec.kind = SyntheticKind::kRandomStronglyConvexL1;
  spec.dimension = 8;
  spec.seed = 5;
  const SyntheticInstance inst = gen_instance(spec);
  const Chart chart = make_chart(inst.solution);
  REQUIRE(chart.dim() >= 2);
  Vector y = restrict_to_chart(chart, inst.solution);
  for (double& v : y) v *= 1.2;  // move off the solution, same signs
  const Vector g = chart_gradient(*inst.smooth, *inst.reg, chart, y);
  const Vector fd = oracles::fd_gradient(
      [&](const Vector& yy) {
        const Vector x = embed_from_chart(chart, yy);
        return inst.smooth->value(x) + inst.reg->value(x);
      },
      y, 1e-6);
  CHECK(oracles::relative_error(g, fd) < 1e-5);
}

TEST_CASE("reduced Hessian restricts, damps, and stays PSD") {
  SyntheticSpec spec;
  spec.kind = SyntheticKind::kRandomStronglyConvexL1;
  spec.dimension = 10;
  spec.seed = 11;
  const SyntheticInstance inst = gen_instance(spec);
  const Chart chart = make_chart(inst.solution);
  const Vector y = restrict_to_chart(chart, inst.solution);
  std::mt19937_64 rng(3);
  const double mu = 2e-6;
  for (int trial = 0; trial < 10; ++trial) {
    const Vector u = oracles::random_vector(chart.dim(), rng);
    const Vector v = oracles::random_vector(chart.dim(), rng);
    const Vector hu = reduced_hess_vec(*inst.smooth, chart, y, u, mu);
    const Vector hv = reduced_hess_vec(*inst.smooth, chart, y, v, mu);
    CHECK(std::fabs(dot(u, hv) - dot(v, hu)) < 1e-11 * (1 + nrm2(hu) + nrm2(hv)));
    CHECK(dot(v, hv) >= 0.0);
  }
  // mu = c ||g||^rho with ||g|| = 4, c = 1e-6, rho = 0.5 adds exactly 2e-6 v
  const Vector v(chart.dim(), 1.0);
  const Vector with = reduced_hess_vec(*inst.smooth, chart, y, v, 2e-6);
  const Vector without = reduced_hess_vec(*inst.smooth, chart, y, v, 0.0);
  for (std::size_t i = 0; i < v.size(); ++i)
    CHECK(with[i] - without[i] == doctest::Approx(2e-6).epsilon(1e-9));
}

TEST_CASE("full-support chart reduces to the plain Hessian product") {
  const SyntheticInstance inst = example1_instance();
  const Chart chart = make_chart({1.0, -1.0});
  std::mt19937_64 rng(7);
  const Vector v = oracles::random_vector(2, rng);
  const Vector red = reduced_hess_vec(*inst.smooth, chart, {1.0, -1.0}, v, 0.0);
  Vector full;
  inst.smooth->hess_vec({1.0, -1.0}, v, full);
  CHECK(red[0] == doctest::Approx(full[0]));
  CHECK(red[1] == doctest::Approx(full[1]));
}

TEST_CASE("pcg solves the identity system in one iteration") {
  const Vector g{1.0, -2.0, 3.0};
  const auto apply = [](const Vector& v) { return v; };
  const PcgResult res = pcg(apply, g, Vector(3, 1.0), 1e-14, 10);
  CHECK(res.iterations == 1);
  CHECK(res.met_tolerance);
  for (std::size_t i = 0; i < 3; ++i) CHECK(res.q[i] == doctest::Approx(-g[i]));
}

TEST_CASE("pcg reaches the tolerance within dim iterations on SPD systems") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t d = 2 + rng() % 9;
    DenseMatrix a(d, d);
    for (std::size_t i = 0; i < d; ++i) a(i, i) = 0.5 + 3.0 * oracles::uniform(rng);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i + 1; j < d; ++j) {
        a(i, j) = 0.05 * oracles::gauss(rng);
        a(j, i) = a(i, j);
      }
    const Vector g = oracles::random_vector(d, rng);
    Vector precond(d);
    for (std::size_t i = 0; i < d; ++i) precond[i] = a(i, i);
    const PcgResult res =
        pcg([&](const Vector& v) { return a.apply(v); }, g, precond, 1e-8, d + 2);
    CHECK(res.met_tolerance);
    CHECK(nrm2(a.apply(res.q) + g) <= 1e-8 * 1.0001);
  }
}

TEST_CASE("diagonal preconditioning beats the unpreconditioned count") {
  const std::size_t d = 40;
  DenseMatrix a(d, d);
  std::mt19937_64 rng(17);
  for (std::size_t i = 0; i < d; ++i) a(i, i) = std::pow(10.0, 4.0 * i / (d - 1));
  for (std::size_t i = 0; i + 1 < d; ++i) {
    a(i, i + 1) = 0.01 * a(i, i);
    a(i + 1, i) = a(i, i + 1);
  }
  const Vector g = oracles::random_vector(d, rng);
  Vector diag(d);
  for (std::size_t i = 0; i < d; ++i) diag[i] = a(i, i);
  const double tol = 1e-6 * nrm2(g);
  const PcgResult pre =
      pcg([&](const Vector& v) { return a.apply(v); }, g, diag, tol, 4000);
  const PcgResult plain =
      pcg([&](const Vector& v) { return a.apply(v); }, g, Vector(d, 1.0), tol, 4000);
  CHECK(pre.met_tolerance);
  CHECK(pre.iterations < plain.iterations);
}

TEST_CASE("pcg flags nonpositive curvature and returns the best iterate") {
  DenseMatrix a(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = -1.0;
  const PcgResult res =
      pcg([&](const Vector& v) { return a.apply(v); }, {0.0, 1.0}, Vector(2, 1.0),
          1e-12, 10);
  CHECK(res.negative_curvature);
  CHECK_FALSE(res.met_tolerance);
}

TEST_CASE("tssn takes the unit Newton step on a strongly convex chart") {
  SyntheticSpec spec;
  spec.kind = SyntheticKind::kRandomStronglyConvexL1;
  spec.dimension = 12;
  spec.seed = 23;
  const SyntheticInstance inst = gen_instance(spec);
  const Chart chart = make_chart(inst.solution);
  // start near the solution on the correct manifold; rho = 1 with an exact
  // quadratic chart gives the quadratic tail
  Vector x = inst.solution;
  std::mt19937_64 rng(29);
  for (std::uint32_t i : chart.free_indices) x[i] += 1e-4 * oracles::gauss(rng);
  TssnConfig cfg;
  cfg.rho = 1.0;
  double f_x = inst.problem().value(x);
  double err = nrm2(x - inst.solution);
  for (int step = 0; step < 2; ++step) {
    const TssnOutcome out =
        tssn_step(*inst.smooth, *inst.reg, x, f_x, make_chart(x), cfg, 64);
    REQUIRE(out.status == TssnStatus::kAccepted);
    CHECK(out.alpha == 1.0);
    x = out.x_new;
    f_x = out.f_new;
    const double new_err = nrm2(x - inst.solution);
    CHECK(new_err < err);
    err = new_err;
  }
  CHECK(err < 1e-12);
}

TEST_CASE("tssn accepts trivially at a stationary chart point") {
  const SyntheticInstance inst = example1_instance();
  const double f_star = inst.problem().value(inst.solution);
  const TssnOutcome out = tssn_step(*inst.smooth, *inst.reg, inst.solution, f_star,
                                    make_chart(inst.solution), TssnConfig{}, 16);
  CHECK(out.status == TssnStatus::kAccepted);
  CHECK(out.x_new == inst.solution);
  CHECK(out.grad_norm == 0.0);
}

TEST_CASE("a wrong manifold cannot descend below its restricted optimum") {
  // true solution is (2, 0); pin the chart to coordinate 1 instead
  const SyntheticInstance inst = example1_instance();
  const Vector x{0.0, 1.0};
  Chart chart = make_chart(x);
  REQUIRE(chart.free_indices == std::vector<std::uint32_t>{1});
  double f_x = inst.problem().value(x);
  // restricted optimum over {x1 = 0}: minimize (x2-.3)^2 + |x2| -> x2 = 0 is
  // outside the chart; on the open half-line the infimum is at x2 -> 0+
  const TssnOutcome out =
      tssn_step(*inst.smooth, *inst.reg, x, f_x, chart, TssnConfig{}, 16);
  if (out.status == TssnStatus::kAccepted || out.status == TssnStatus::kAcceptedDamped) {
    CHECK(out.f_new >= 2.5 * 2.5 - 1e-9);  // still pays (x1-2.5)^2 >= 6.25
    // the PG safeguard from the accepted point changes the pattern
    Vector g(2);
    inst.smooth->gradient(out.x_new, g);
    Vector u = out.x_new;
    axpy(-0.5, g, u);
    const Vector next = inst.reg->prox(u, 0.5);
    CHECK(manifold_of(next) != manifold_of(out.x_new));
  }
}

TEST_CASE("the truncated step norm obeys the damped-Newton bound") {
  // on a quadratic chart the semismooth remainder vanishes, so
  //   ||q|| <= 2 d + (0.1/mu) ||g||^{1+rho}
  SyntheticSpec spec;
  spec.kind = SyntheticKind::kRandomStronglyConvexL1;
  spec.dimension = 16;
  spec.seed = 31;
  const SyntheticInstance inst = gen_instance(spec);
  const Chart chart = make_chart(inst.solution);
  const Vector y_star = restrict_to_chart(chart, inst.solution);
  std::mt19937_64 rng(37);
  TssnConfig cfg;
  for (int trial = 0; trial < 10; ++trial) {
    Vector y = y_star;
    for (double& v : y) v *= 1.0 + 0.05 * oracles::gauss(rng);
    const double d_t = nrm2(y - y_star);
    const Vector g = chart_gradient(*inst.smooth, *inst.reg, chart, y);
    const double gnorm = nrm2(g);
    const double mu = cfg.c * std::pow(gnorm, cfg.rho);
    const double tol = 0.1 * std::min(gnorm, std::pow(gnorm, 1.0 + cfg.rho));
    Vector precond = restrict_to_chart(chart, inst.smooth->hess_diagonal(
                                                  embed_from_chart(chart, y)));
    for (double& p : precond) p += mu;
    const PcgResult res = pcg(
        [&](const Vector& v) { return reduced_hess_vec(*inst.smooth, chart, y, v, mu); },
        g, precond, tol, 4 * chart.dim());
    REQUIRE(res.met_tolerance);
    const double bound = 2.0 * d_t + 0.1 / mu * std::pow(gnorm, 1.0 + cfg.rho);
    CHECK(nrm2(res.q) <= bound * (1 + 1e-9));
  }
}

TEST_CASE("tssn fails with a tiny-step report on a non-decreasable chart") {
  // at the restricted minimizer of the wrong manifold any chart direction
  // increases F, so the backtracking floor is hit unless q is non-descent
  SeparableQuadratic f(Vector{1.0, 1.0}, Vector{2.5, 0.3});
  L1Regularizer reg(1.0);
  // x2 slightly above the restricted optimum 0; q points along x2
  const Vector x{0.0, 1e-9};
  const double f_x = f.value(x) + reg.value(x);
  const TssnOutcome out = tssn_step(f, reg, x, f_x, make_chart(x), TssnConfig{}, 8);
  CHECK((out.status == TssnStatus::kFailTinyStep ||
         out.status == TssnStatus::kFailNonDescent ||
         out.status == TssnStatus::kAcceptedDamped));
}
