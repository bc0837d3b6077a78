#include "isqa/outer_loop.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace isqa {

std::string to_string(StageTag tag) {
  switch (tag) {
    case StageTag::kFirst: return "first";
    case StageTag::kPg: return "pg";
    case StageTag::kMo: return "mo";
    case StageTag::kMoFail: return "mo-fail";
  }
  return "?";
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::kTolerance: return "tolerance";
    case Termination::kMaxIterations: return "max-iterations";
    case Termination::kTimeLimit: return "time-limit";
    case Termination::kLineSearchFailure: return "line-search-failure";
    case Termination::kEnlargementFailure: return "enlargement-failure";
  }
  return "?";
}

ArmijoResult armijo_search(const std::function<double(const Vector&)>& objective,
                           const Vector& x, const Vector& p, double f_at_x,
                           double q_hat, double gamma, double beta) {
  if (!(q_hat < 0.0))
    throw std::invalid_argument("armijo_search: model decrease must be negative");
  ArmijoResult res;
  double alpha = 1.0;
  Vector trial(x.size());
  while (res.trials < 50) {
    for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + alpha * p[i];
    ++res.trials;
    if (objective(trial) <= f_at_x + gamma * alpha * q_hat) {
      res.alpha = alpha;
      res.success = true;
      return res;
    }
    alpha *= beta;
  }
  return res;
}

namespace {

using Clock = std::chrono::steady_clock;

std::size_t enlargement_bound(EnlargementVariant variant, double beta, double l_hat,
                              double m0) {
  double rounds = 0.0;
  const double log_inv_beta =
      std::log(1.0 / (variant == EnlargementVariant::kDoubling ? 0.5 : beta));
  switch (variant) {
    case EnlargementVariant::kScale:
    case EnlargementVariant::kDoubling:
      if (l_hat > m0) rounds = std::ceil(std::log(l_hat / m0) / log_inv_beta);
      break;
    case EnlargementVariant::kAdditive:
      if (l_hat > 1.0) rounds = 1.0 + std::ceil(std::log(l_hat) / log_inv_beta);
      break;
  }
  return static_cast<std::size_t>(std::max(rounds, 0.0)) + 10;
}

class Driver {
 public:
  Driver(const CompositeProblem& problem, const OuterConfig& config, Vector x0,
         std::optional<double> f_star)
      : prob_(problem),
        cfg_(config),
        lbfgs_(problem.dim(), config.lbfgs_memory, config.lbfgs_safeguard),
        x_(std::move(x0)) {
    if (x_.empty()) x_.assign(prob_.dim(), 0.0);
    if (x_.size() != prob_.dim()) throw std::invalid_argument("run: x0 dimension mismatch");
    report_.f_star = f_star;
    l_hat_ = prob_.smooth->lipschitz_upper();
    pcg_budget_ = cfg_.tssn.pcg_initial_budget;
  }

  SolveReport run() {
    const auto start = Clock::now();
    f_val_ = prob_.smooth->value(x_);
    psi_val_ = prob_.reg->value(x_);
    Vector grad(prob_.dim());
    prob_.smooth->gradient(x_, grad);

    SupportPattern pattern = manifold_of(x_);
    std::size_t unchanged = 0;
    bool smooth_step_flag = false;
    bool have_prev_pattern = false;

    for (std::size_t t = 0; t < cfg_.max_outer; ++t) {
      const double elapsed =
          std::chrono::duration<double>(Clock::now() - start).count();
      if (elapsed > cfg_.max_seconds) {
        report_.termination = Termination::kTimeLimit;
        break;
      }

      // Theorem-5 measure: identity-metric prox-gradient step length
      Vector u = x_ - grad;
      const Vector g_step = prob_.reg->prox(u, 1.0) - x_;
      const double g_norm = nrm2(g_step);
      report_.final_prox_grad_norm = g_norm;
      if (g_norm <= cfg_.tol) {
        report_.termination = Termination::kTolerance;
        break;
      }

      // manifold bookkeeping (Unchanged counter)
      const SupportPattern current = manifold_of(x_);
      if (have_prev_pattern && current == pattern)
        ++unchanged;
      else
        unchanged = 0;
      pattern = current;
      have_prev_pattern = true;

      TraceRecord rec;
      rec.iteration = t;
      rec.prox_grad_norm = g_norm;

      Vector x_new;
      bool ok = true;
      if (cfg_.algorithm == Algorithm::kIsqa || force_first_ ||
          unchanged < cfg_.s_trigger) {
        smooth_step_flag = false;
        force_first_ = false;
        ok = first_stage(grad, g_norm, rec, x_new);
      } else if (smooth_step_flag) {
        smooth_step_flag = false;
        pg_step(grad, rec, x_new);
      } else {
        mo_step(rec, x_new, smooth_step_flag, unchanged);
      }
      if (!ok) break;

      if (x_new != x_) {
        const double f_new = prob_.smooth->value(x_new);
        const double psi_new = prob_.reg->value(x_new);
        // reject round-off-level increases so the recorded objective is
        // nonincreasing bitwise; real increases are excluded by the accept
        // conditions already
        if (f_new + psi_new <= f_val_ + psi_val_) {
          Vector grad_new(prob_.dim());
          prob_.smooth->gradient(x_new, grad_new);
          if (cfg_.hessian_kind == HessianKind::kLbfgs)
            lbfgs_.update(x_new - x_, grad_new - grad);
          grad = std::move(grad_new);
          x_ = std::move(x_new);
          f_val_ = f_new;
          psi_val_ = psi_new;
        }
      }

      rec.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
      rec.objective = f_val_ + psi_val_;
      rec.nnz = count_nonzero(x_);
      if (report_.f_star)
        rec.rel_gap = (rec.objective - *report_.f_star) / *report_.f_star;
      report_.trace.push_back(rec);
      report_.pattern_history.push_back(manifold_of(x_));
      if (cfg_.record_iterates) report_.iterates.push_back(x_);
      report_.iterations = t + 1;
    }

    {
      Vector g_final(prob_.dim());
      prob_.smooth->gradient(x_, g_final);
      Vector u = x_ - g_final;
      report_.final_prox_grad_norm = nrm2(prob_.reg->prox(u, 1.0) - x_);
      if (report_.final_prox_grad_norm <= cfg_.tol &&
          report_.termination == Termination::kMaxIterations)
        report_.termination = Termination::kTolerance;
    }
    report_.x = x_;
    report_.f_value = f_val_;
    report_.psi_value = psi_val_;
    report_.objective = f_val_ + psi_val_;
    return std::move(report_);
  }

 private:
  double objective(const Vector& x) const { return prob_.value(x); }

  std::unique_ptr<HessianOperator> base_operator(double g_norm) {
    switch (cfg_.hessian_kind) {
      case HessianKind::kIdentity:
        return std::make_unique<IdentityOperator>(prob_.dim(), l_hat_);
      case HessianKind::kNewton: {
        const double damping = cfg_.newton_c * std::pow(g_norm, cfg_.newton_rho);
        return std::make_unique<DampedNewtonOperator>(*prob_.smooth, x_, damping);
      }
      case HessianKind::kLbfgs:
        if (lbfgs_.pair_count() == 0)
          return std::make_unique<IdentityOperator>(prob_.dim(), l_hat_);
        return nullptr;  // use the persistent operator
    }
    return nullptr;
  }

  bool first_stage(const Vector& grad, double g_norm, TraceRecord& rec, Vector& x_new) {
    rec.stage = StageTag::kFirst;
    std::unique_ptr<HessianOperator> owned = base_operator(g_norm);
    const HessianOperator& base = owned ? *owned : static_cast<HessianOperator&>(lbfgs_);
    EnlargedOperator h(base, cfg_.enlargement, cfg_.beta);

    SubsolverBudget budget;
    budget.min_iterations = cfg_.t_inner;
    budget.max_iterations = std::max(cfg_.t_inner, cfg_.inner_max);
    budget.criterion = {StopKind::kProxGradNorm, 0.0, cfg_.inner_eta};
    budget.rng_seed = cfg_.seed ^ (0x9e3779b97f4a7c15ULL * (report_.iterations + 1));

    const std::size_t max_enlarge = enlargement_bound(
        cfg_.enlargement, cfg_.beta, l_hat_, base.strong_convexity_bound());
    const double f_x = f_val_ + psi_val_;

    while (true) {
      QuadraticModel model(x_, grad, h, *prob_.reg);
      SubsolveResult inner = solve_subproblem(cfg_.subsolver, model, budget);
      rec.inner_iterations += inner.iterations;
      rec.q_hat = inner.q_value;
      rec.h_norm_bound = h.norm_bound();

      if (!(inner.q_value < 0.0)) {
        // no model decrease found; fall back to the safeguard step, which is
        // the exact subproblem solution for H = l_hat * I
        pg_step(grad, rec, x_new);
        rec.stage = StageTag::kFirst;
        return true;
      }

      if (cfg_.algorithm == Algorithm::kIsqa) {
        const ArmijoResult ls = armijo_search(
            [this](const Vector& v) { return objective(v); }, x_, inner.p, f_x,
            inner.q_value, cfg_.gamma, cfg_.beta);
        if (!ls.success) {
          report_.termination = Termination::kLineSearchFailure;
          return false;
        }
        rec.step_size = ls.alpha;
        x_new = x_;
        axpy(ls.alpha, inner.p, x_new);
        return true;
      }

      // ISQA+: unit step or enlarge-and-resolve
      Vector trial = x_ + inner.p;
      if (objective(trial) <= f_x + cfg_.gamma * inner.q_value) {
        rec.step_size = 1.0;
        x_new = std::move(trial);
        return true;
      }
      h.enlarge();
      rec.enlargements = h.enlargements();
      if (h.enlargements() > max_enlarge) {
        // exceeding the guaranteed termination bound indicates an
        // inconsistent Lipschitz or curvature estimate
        report_.termination = Termination::kEnlargementFailure;
        return false;
      }
    }
  }

  void pg_step(const Vector& grad, TraceRecord& rec, Vector& x_new) {
    rec.stage = StageTag::kPg;
    rec.step_size = 1.0;
    rec.h_norm_bound = l_hat_;
    Vector u = x_;
    axpy(-1.0 / l_hat_, grad, u);
    x_new = prob_.reg->prox(u, 1.0 / l_hat_);
  }

  void mo_step(TraceRecord& rec, Vector& x_new, bool& smooth_step_flag,
               std::size_t& unchanged) {
    const Chart chart = make_chart(x_);
    TssnConfig tssn = cfg_.tssn;
    tssn.beta = cfg_.beta;
    const std::size_t budget = std::max<std::size_t>(
        1, std::min(pcg_budget_, std::max<std::size_t>(chart.dim(), 1)));
    const TssnOutcome out =
        tssn_step(*prob_.smooth, *prob_.reg, x_, f_val_ + psi_val_, chart, tssn, budget);
    rec.tssn_grad_norm = out.grad_norm;
    rec.inner_iterations = out.pcg_iterations;

    switch (out.status) {
      case TssnStatus::kAccepted:
        rec.stage = StageTag::kMo;
        rec.step_size = out.alpha;
        x_new = out.x_new;
        smooth_step_flag = true;
        pcg_budget_ = std::min(2 * pcg_budget_, std::max<std::size_t>(chart.dim(), 1));
        break;
      case TssnStatus::kAcceptedDamped:
        // damped step: accept the decrease but treat the manifold as suspect
        rec.stage = StageTag::kMo;
        rec.step_size = out.alpha;
        x_new = out.x_new;
        smooth_step_flag = false;
        unchanged = 0;
        force_first_ = true;
        pcg_budget_ = cfg_.tssn.pcg_initial_budget;
        break;
      default:
        rec.stage = StageTag::kMoFail;
        rec.step_size = 0.0;
        x_new = x_;
        smooth_step_flag = false;
        unchanged = 0;
        force_first_ = true;
        pcg_budget_ = cfg_.tssn.pcg_initial_budget;
        break;
    }
  }

  const CompositeProblem& prob_;
  const OuterConfig& cfg_;
  LbfgsOperator lbfgs_;
  Vector x_;
  double f_val_ = 0.0;
  double psi_val_ = 0.0;
  double l_hat_ = 1.0;
  std::size_t pcg_budget_ = 5;
  bool force_first_ = false;  // set on MO failure: next step returns to stage one
  SolveReport report_;
};

}  // namespace

SolveReport run(const CompositeProblem& problem, const OuterConfig& config, Vector x0,
                std::optional<double> f_star) {
  if (!problem.smooth || !problem.reg)
    throw std::invalid_argument("run: incomplete problem");
  Driver driver(problem, config, std::move(x0), f_star);
  return driver.run();
}

SolveReport reference_run(const CompositeProblem& problem, std::size_t max_outer,
                          double max_seconds) {
  OuterConfig cfg;
  cfg.algorithm = Algorithm::kIsqaPlus;
  cfg.hessian_kind = HessianKind::kNewton;
  cfg.subsolver = SubsolverKind::kRpcd;
  cfg.tol = 1e-13;
  cfg.max_outer = max_outer;
  cfg.max_seconds = max_seconds;
  return run(problem, cfg);
}

}  // namespace isqa
