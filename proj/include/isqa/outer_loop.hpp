#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "isqa/hessian.hpp"
#include "isqa/manifold_newton.hpp"
#include "isqa/problem.hpp"
#include "isqa/regularizer.hpp"
#include "isqa/subsolvers.hpp"

namespace isqa {

/// Composite objective F = f + Psi with an l1 regularizer.
struct CompositeProblem {
  const SmoothFunction* smooth = nullptr;
  const L1Regularizer* reg = nullptr;

  std::size_t dim() const { return smooth->dim(); }
  double value(const Vector& x) const { return smooth->value(x) + reg->value(x); }
};

enum class Algorithm { kIsqa, kIsqaPlus };
enum class HessianKind { kLbfgs, kNewton, kIdentity };

struct OuterConfig {
  double gamma = 1e-4;  // sufficient-decrease constant
  double beta = 0.5;    // backtracking ratio
  std::size_t t_inner = 5;   // minimum inner iterations (T)
  std::size_t s_trigger = 10;  // unchanged-manifold threshold (S)
  double tol = 1e-8;    // on the identity-metric prox-gradient norm
  std::size_t max_outer = 1000;
  double max_seconds = std::numeric_limits<double>::infinity();
  Algorithm algorithm = Algorithm::kIsqaPlus;
  HessianKind hessian_kind = HessianKind::kLbfgs;
  SubsolverKind subsolver = SubsolverKind::kRpcd;
  EnlargementVariant enlargement = EnlargementVariant::kDoubling;
  std::size_t inner_max = 100;
  double inner_eta = 0.9;  // multiplicative inner stopping rule
  std::uint64_t seed = 0;
  std::size_t lbfgs_memory = 10;
  double lbfgs_safeguard = 1e-10;
  double newton_c = 1e-6;
  double newton_rho = 0.5;
  TssnConfig tssn;
  bool record_iterates = false;  // keep per-iteration x snapshots (audits)
};

enum class StageTag { kFirst, kPg, kMo, kMoFail };
std::string to_string(StageTag tag);

struct TraceRecord {
  std::size_t iteration = 0;
  double wall_seconds = 0.0;
  double objective = 0.0;
  double rel_gap = std::numeric_limits<double>::quiet_NaN();
  std::size_t nnz = 0;
  StageTag stage = StageTag::kFirst;
  double step_size = 0.0;
  double prox_grad_norm = 0.0;   // ||G_t|| before the step
  std::size_t inner_iterations = 0;
  std::size_t enlargements = 0;
  // diagnostics beyond the CSV columns
  double q_hat = 0.0;            // Q_t(p^t) of a first-stage step
  double h_norm_bound = 0.0;     // norm bound of the H_t actually used
  double tssn_grad_norm = 0.0;
};

enum class Termination {
  kTolerance,
  kMaxIterations,
  kTimeLimit,
  kLineSearchFailure,
  kEnlargementFailure,
};
std::string to_string(Termination t);

struct SolveReport {
  Vector x;
  double f_value = 0.0;
  double psi_value = 0.0;
  double objective = 0.0;
  double final_prox_grad_norm = 0.0;
  Termination termination = Termination::kMaxIterations;
  std::size_t iterations = 0;
  std::vector<TraceRecord> trace;
  std::vector<SupportPattern> pattern_history;  // pattern after each iteration
  std::vector<Vector> iterates;                 // when record_iterates is set
  std::optional<double> f_star;
};

struct ArmijoResult {
  double alpha = 0.0;
  std::size_t trials = 0;
  bool success = false;
};

/// Largest alpha in {beta^0, beta^1, ...} with
///   F(x + alpha p) <= F(x) + gamma * alpha * q_hat,
/// capped at 50 trials. Requires q_hat < 0.
ArmijoResult armijo_search(const std::function<double(const Vector&)>& objective,
                           const Vector& x, const Vector& p, double f_at_x,
                           double q_hat, double gamma, double beta);

/// Runs the configured algorithm from x0 (zeros when empty). `f_star`, when
/// supplied, feeds the rel_gap trace column.
SolveReport run(const CompositeProblem& problem, const OuterConfig& config,
                Vector x0 = {}, std::optional<double> f_star = std::nullopt);

/// High-accuracy reference solve used to produce F*: damped-Newton ISQA+ at
/// tol 1e-13 with a generous budget.
SolveReport reference_run(const CompositeProblem& problem,
                          std::size_t max_outer = 2000, double max_seconds = 600.0);

}  // namespace isqa
