#include "isqa/subsolvers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace isqa {

SubsolverKind subsolver_from_string(const std::string& name) {
  if (name == "pg") return SubsolverKind::kPg;
  if (name == "apg") return SubsolverKind::kApg;
  if (name == "rpcd") return SubsolverKind::kRpcd;
  if (name == "sparsa") return SubsolverKind::kSparsa;
  throw std::invalid_argument("unknown subsolver '" + name + "'");
}

std::string to_string(SubsolverKind kind) {
  switch (kind) {
    case SubsolverKind::kPg: return "pg";
    case SubsolverKind::kApg: return "apg";
    case SubsolverKind::kRpcd: return "rpcd";
    case SubsolverKind::kSparsa: return "sparsa";
  }
  return "?";
}

namespace {

void record_prox(SubsolveResult& res, const Vector& pre, double inv_tau,
                 std::size_t dim) {
  res.pre_prox_point = pre;
  res.prox_metric.assign(dim, inv_tau);
}

}  // namespace

SubsolveResult solve_pg(const QuadraticModel& model, const SubsolverBudget& budget) {
  const double tau = 1.0 / model.hess->norm_bound();
  SubsolveResult res;
  res.p.assign(model.dim(), 0.0);
  res.q_value = 0.0;
  for (std::size_t i = 0; i < budget.max_iterations; ++i) {
    Vector next = model.prox_grad_step(res.p, tau);
    record_prox(res, res.p, 1.0 / tau, model.dim());
    res.p = std::move(next);
    res.q_value = model.q_value(res.p);
    ++res.iterations;
    if (res.iterations >= budget.min_iterations &&
        check_stop(model, res.p, budget.criterion)) {
      res.criterion_met = true;
      break;
    }
  }
  return res;
}

SubsolveResult solve_apg(const QuadraticModel& model, const SubsolverBudget& budget) {
  const double big_m = model.hess->norm_bound();
  const double m = model.hess->strong_convexity_bound();
  const double kappa = big_m / m;
  const double momentum = 1.0 - 2.0 / (std::sqrt(kappa) + 1.0);
  const double tau = 1.0 / big_m;

  SubsolveResult res;
  res.p.assign(model.dim(), 0.0);
  res.q_value = 0.0;
  Vector prev = res.p;
  Vector y = res.p;
  for (std::size_t i = 0; i < budget.max_iterations; ++i) {
    Vector candidate = model.prox_grad_step(y, tau);
    double q_candidate = model.q_value(candidate);
    bool restarted = false;
    if (q_candidate > res.q_value) {
      // restart: reset momentum and take a plain descent step from p
      y = res.p;
      candidate = model.prox_grad_step(y, tau);
      q_candidate = model.q_value(candidate);
      restarted = true;
    }
    record_prox(res, y, big_m, model.dim());
    if (restarted)
      prev = candidate;  // zero momentum for the step after a restart
    else
      prev = std::move(res.p);
    res.p = std::move(candidate);
    res.q_value = q_candidate;
    ++res.iterations;
    if (res.iterations >= budget.min_iterations &&
        check_stop(model, res.p, budget.criterion)) {
      res.criterion_met = true;
      break;
    }
    y = res.p;
    for (std::size_t j = 0; j < y.size(); ++j)
      y[j] += momentum * (res.p[j] - prev[j]);
  }
  return res;
}

SubsolveResult solve_rpcd(const QuadraticModel& model, const SubsolverBudget& budget) {
  const std::size_t d = model.dim();
  SubsolveResult res;
  res.p.assign(d, 0.0);
  res.q_value = 0.0;

  auto state = model.hess->coordinate_state();
  state->reset();
  const Vector diag = model.hess->diagonal();
  std::mt19937_64 rng(budget.rng_seed);
  std::vector<std::uint32_t> perm(d);
  std::iota(perm.begin(), perm.end(), 0);

  for (std::size_t epoch = 0; epoch < budget.max_iterations; ++epoch) {
    for (std::size_t i = d; i > 1; --i) {  // Fisher-Yates reshuffle per epoch
      const std::size_t j = rng() % i;
      std::swap(perm[i - 1], perm[j]);
    }
    for (std::size_t k = 0; k < d; ++k) {
      const std::size_t i = perm[k];
      const double gi = model.grad[i] + state->hp_entry(i);
      const double hii = diag[i];
      // exact 1-D minimizer of Q along coordinate i, in x-space
      const double u = model.reg->prox_scalar(
          model.base[i] + res.p[i] - gi / hii, 1.0 / hii);
      const double delta = (u - model.base[i]) - res.p[i];
      if (delta != 0.0) {
        res.p[i] += delta;
        state->update(i, delta);
      }
    }
    ++res.iterations;
    if (res.iterations >= budget.min_iterations &&
        check_stop(model, res.p, budget.criterion))
      break;
  }

  // One trailing prox-gradient step gives the returned direction the exact
  // proximal form required of inner solutions, and never increases Q.
  const double tau = 1.0 / model.hess->norm_bound();
  Vector pre = res.p;
  res.p = model.prox_grad_step(res.p, tau);
  record_prox(res, pre, 1.0 / tau, d);
  res.q_value = model.q_value(res.p);
  res.criterion_met = check_stop(model, res.p, budget.criterion);
  return res;
}

SubsolveResult solve_sparsa(const QuadraticModel& model, const SubsolverBudget& budget) {
  const double big_m = model.hess->norm_bound();
  const double m = model.hess->strong_convexity_bound();
  const double tau_min = 1.0 / (10.0 * big_m);
  const double tau_max = 10.0 / m;

  SubsolveResult res;
  res.p.assign(model.dim(), 0.0);
  res.q_value = 0.0;
  double tau = 1.0 / big_m;
  Vector g_prev = model.model_gradient(res.p);

  for (std::size_t i = 0; i < budget.max_iterations; ++i) {
    double t = tau;
    Vector candidate;
    double q_candidate;
    for (int back = 0;; ++back) {
      candidate = model.prox_grad_step(res.p, t);
      q_candidate = model.q_value(candidate);
      if (q_candidate <= res.q_value || back >= 60) break;
      t *= 0.5;
    }
    if (q_candidate > res.q_value) break;  // no progress possible from here
    record_prox(res, res.p, 1.0 / t, model.dim());

    const Vector g_new = model.model_gradient(candidate);
    const Vector dp = candidate - res.p;
    const Vector dg = g_new - g_prev;
    const double dgdg = dot(dg, dg);
    if (dgdg > 0.0) tau = std::clamp(dot(dp, dg) / dgdg, tau_min, tau_max);
    g_prev = g_new;
    res.p = std::move(candidate);
    res.q_value = q_candidate;
    ++res.iterations;
    if (res.iterations >= budget.min_iterations &&
        check_stop(model, res.p, budget.criterion)) {
      res.criterion_met = true;
      break;
    }
  }
  return res;
}

SubsolveResult solve_subproblem(SubsolverKind kind, const QuadraticModel& model,
                                const SubsolverBudget& budget) {
  if (budget.min_iterations > budget.max_iterations || budget.min_iterations == 0)
    throw std::invalid_argument("solve_subproblem: invalid iteration budget");
  switch (kind) {
    case SubsolverKind::kPg: return solve_pg(model, budget);
    case SubsolverKind::kApg: return solve_apg(model, budget);
    case SubsolverKind::kRpcd: return solve_rpcd(model, budget);
    case SubsolverKind::kSparsa: return solve_sparsa(model, budget);
  }
  throw std::logic_error("unreachable");
}

}  // namespace isqa
