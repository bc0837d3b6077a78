#include "isqa/verify.hpp"

#include <cmath>
#include <random>

namespace isqa {

RateVerdict make_verdict(std::string claim, std::string instance, double measured,
                         double bound) {
  RateVerdict v;
  v.claim = std::move(claim);
  v.instance = std::move(instance);
  v.measured = measured;
  v.bound = bound;
  const double slack = 1e-9 * std::max(std::fabs(bound), std::fabs(measured)) + 1e-15;
  v.pass = measured <= bound + slack;
  v.margin = bound - measured;
  return v;
}

bool all_pass(const std::vector<RateVerdict>& verdicts) {
  for (const auto& v : verdicts)
    if (!v.pass) return false;
  return true;
}

// ---------------------------------------------------------------------------

namespace {

class DenseCoordinateState final : public HessianCoordinateState {
 public:
  explicit DenseCoordinateState(const DenseMatrix& m) : m_(&m), p_(m.rows(), 0.0) {}
  void reset() override { p_.assign(p_.size(), 0.0); }
  double hp_entry(std::size_t i) const override {
    double s = 0.0;
    for (std::size_t j = 0; j < p_.size(); ++j) s += (*m_)(i, j) * p_[j];
    return s;
  }
  void update(std::size_t i, double delta) override { p_[i] += delta; }

 private:
  const DenseMatrix* m_;
  Vector p_;
};

}  // namespace

DenseOperator::DenseOperator(DenseMatrix m, double eig_min, double eig_max)
    : m_(std::move(m)), eig_min_(eig_min), eig_max_(eig_max) {}

Vector DenseOperator::diagonal() const {
  Vector d(m_.rows());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = m_(i, i);
  return d;
}

std::unique_ptr<HessianCoordinateState> DenseOperator::coordinate_state() const {
  return std::make_unique<DenseCoordinateState>(m_);
}

double oracle_q_star(const QuadraticModel& model, std::size_t max_iterations) {
  const double tau = 1.0 / model.hess->norm_bound();
  Vector p(model.dim(), 0.0);
  for (std::size_t i = 0; i < max_iterations; ++i) {
    Vector next = model.prox_grad_step(p, tau);
    const double move = nrm2(next - p);
    p = std::move(next);
    if (move <= 1e-15 * std::max(1.0, nrm2(p))) break;
  }
  return model.q_value(p);
}

// ---------------------------------------------------------------------------
// inequalities (descent-lemma chains with oracle Q*)

namespace {

double uniform(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
}

double gauss(std::mt19937_64& rng) {
  const double u1 = uniform(rng), u2 = uniform(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

DenseMatrix spd_from_seed(std::size_t d, double m, double big_m, std::mt19937_64& rng) {
  // diag spectrum in [m, M] rotated by random Givens sweeps
  DenseMatrix p(d, d);
  p(0, 0) = m;
  if (d > 1) p(d - 1, d - 1) = big_m;
  for (std::size_t i = 1; i + 1 < d; ++i)
    p(i, i) = m + (big_m - m) * uniform(rng);
  for (std::size_t sweep = 0; sweep < 2 * d; ++sweep) {
    const std::size_t i = rng() % d;
    std::size_t j = rng() % d;
    if (i == j) j = (j + 1) % d;
    const double theta = 6.283185307179586 * uniform(rng);
    const double c = std::cos(theta), s = std::sin(theta);
    for (std::size_t k = 0; k < d; ++k) {
      const double pik = p(i, k), pjk = p(j, k);
      p(i, k) = c * pik - s * pjk;
      p(j, k) = s * pik + c * pjk;
    }
    for (std::size_t k = 0; k < d; ++k) {
      const double pki = p(k, i), pkj = p(k, j);
      p(k, i) = c * pki - s * pkj;
      p(k, j) = s * pki + c * pkj;
    }
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      const double s = 0.5 * (p(i, j) + p(j, i));
      p(i, j) = s;
      p(j, i) = s;
    }
  return p;
}

}  // namespace

std::vector<RateVerdict> audit_inequalities(std::uint64_t seed, std::size_t instances) {
  std::vector<RateVerdict> out;
  std::mt19937_64 rng(seed * 0x2545f4914f6cdd1dULL + 1);
  for (std::size_t k = 0; k < instances; ++k) {
    const std::size_t d = 2 + rng() % 19;  // d <= 20
    const double m = 0.2 + uniform(rng);
    const double big_m = m * (2.0 + 30.0 * uniform(rng));
    DenseOperator h(spd_from_seed(d, m, big_m, rng), m, big_m);
    Vector base(d), grad(d);
    for (std::size_t i = 0; i < d; ++i) {
      base[i] = (uniform(rng) < 0.4) ? 0.0 : gauss(rng);
      grad[i] = 2.0 * gauss(rng);
    }
    L1Regularizer reg(0.5 + uniform(rng));
    QuadraticModel model(base, grad, h, reg);

    Vector p(d);
    for (std::size_t i = 0; i < d; ++i) p[i] = 0.7 * gauss(rng);
    const double q_star = oracle_q_star(model);
    const double tau = 1.0 / big_m;
    const double gap_p = model.q_value(p) - q_star;
    const double r2 = std::pow(model.residual_min_norm(p), 2);
    const double g2 = std::pow(model.prox_grad_norm(p, tau), 2);
    const Vector pbar = model.prox_grad_step(p, tau);
    const double gap_pbar = model.q_value(pbar) - q_star;
    const double kconst = (2.0 / m + tau) * (1.0 + big_m * tau) / tau - 0.5;

    const std::string id = "inequalities-" + std::to_string(k);
    out.push_back(make_verdict("eq14-residual-vs-gap", id, 2.0 * m * gap_p, r2));
    // one proximal step with tau = 1/M descends Q by at least G^2/(2 tau),
    // so 2m (Q(p) - Q*) >= m M G^2 (tight at every scale, and stronger than
    // the m/M form whenever M >= 1)
    out.push_back(make_verdict("eq14-gap-vs-proxgrad", id, m * big_m * g2,
                               2.0 * m * gap_p));
    out.push_back(make_verdict("eq15-proxgrad-vs-gap", id,
                               tau / kconst * gap_pbar, g2));
  }
  return out;
}

// ---------------------------------------------------------------------------
// identification

IdentificationReport audit_identification(const std::vector<SupportPattern>& history,
                                          const SupportPattern& target) {
  IdentificationReport rep;
  if (history.empty()) return rep;
  rep.identified = history.back() == target;
  if (!rep.identified) return rep;
  std::size_t first = history.size() - 1;
  while (first > 0 && history[first - 1] == target) --first;
  rep.first_iteration = first;
  rep.persistent = true;
  return rep;
}

namespace {

std::size_t pattern_mismatch(const SupportPattern& a, const SupportPattern& b) {
  std::size_t i = 0, j = 0, diff = 0;
  while (i < a.zero_set.size() && j < b.zero_set.size()) {
    if (a.zero_set[i] == b.zero_set[j]) {
      ++i;
      ++j;
    } else if (a.zero_set[i] < b.zero_set[j]) {
      ++i;
      ++diff;
    } else {
      ++j;
      ++diff;
    }
  }
  diff += (a.zero_set.size() - i) + (b.zero_set.size() - j);
  return diff;
}

}  // namespace

std::vector<RateVerdict> audit_identification_suite(std::uint64_t seed,
                                                    std::size_t instances) {
  std::vector<RateVerdict> out;
  const SubsolverKind kinds[] = {SubsolverKind::kPg, SubsolverKind::kApg,
                                 SubsolverKind::kRpcd, SubsolverKind::kSparsa};
  for (std::size_t k = 0; k < instances; ++k) {
    SyntheticSpec spec;
    spec.kind = SyntheticKind::kRandomStronglyConvexL1;
    spec.dimension = 30;
    spec.mu = 1.0;
    spec.seed = seed + k;
    const SyntheticInstance inst = gen_instance(spec);
    const SupportPattern target = manifold_of(inst.solution);
    for (SubsolverKind kind : kinds) {
      OuterConfig cfg;
      cfg.algorithm = Algorithm::kIsqaPlus;
      cfg.hessian_kind = HessianKind::kLbfgs;
      cfg.subsolver = kind;
      cfg.t_inner = 5;
      cfg.tol = 1e-10;
      cfg.max_outer = 600;
      cfg.seed = seed + 31 * k;
      const SolveReport rep = run(inst.problem(), cfg);
      out.push_back(make_verdict(
          "identification-" + to_string(kind), inst.name,
          static_cast<double>(pattern_mismatch(manifold_of(rep.x), target)), 0.0));
    }
  }

  // the handcrafted sequence x^t = (2 + 2^-t, 2^-t) approaches (2,0) without
  // ever entering the manifold {x2 = 0}
  {
    const SyntheticInstance ex1 = example1_instance();
    const SupportPattern target = manifold_of(ex1.solution);
    std::vector<SupportPattern> scripted;
    for (int t = 0; t <= 45; ++t) {
      const double ft = std::ldexp(1.0, -t);
      scripted.push_back(manifold_of(Vector{2.0 + ft, ft}));
    }
    const IdentificationReport rep = audit_identification(scripted, target);
    out.push_back(make_verdict("counterexample-never-identifies", "example1-scripted",
                               rep.identified ? 1.0 : 0.0, 0.0));
  }

  // a run started at the solution is identified at iteration 0
  {
    const SyntheticInstance ex1 = example1_instance();
    OuterConfig cfg;
    cfg.tol = 1e-10;
    cfg.max_outer = 5;
    const SolveReport rep = run(ex1.problem(), cfg, ex1.solution);
    out.push_back(make_verdict(
        "identified-at-start", "example1",
        static_cast<double>(
            pattern_mismatch(manifold_of(rep.x), manifold_of(ex1.solution))),
        0.0));
  }
  return out;
}

// ---------------------------------------------------------------------------
// rates

namespace {

struct EtaMeasurement {
  double eta = 0.0;
  double q_hat = 0.0;
};

// Achieved inner accuracy eta_t = (Q(p) - Q*) / (-Q*) for a first-stage step
// p = x_{t+1} - x_t taken with the identity-scaled Hessian.
EtaMeasurement measure_eta_identity(const CompositeProblem& prob, const Vector& x,
                                    const Vector& x_next, double l_hat) {
  IdentityOperator h(prob.dim(), l_hat);
  Vector grad(prob.dim());
  prob.smooth->gradient(x, grad);
  QuadraticModel model(x, grad, h, *prob.reg);
  const Vector p = x_next - x;
  EtaMeasurement em;
  em.q_hat = model.q_value(p);
  const double q_star = oracle_q_star(model);
  if (q_star < -1e-300) em.eta = std::max(0.0, (em.q_hat - q_star) / (-q_star));
  return em;
}

SolveReport run_identity_exact(const CompositeProblem& prob, double tol,
                               std::size_t max_outer) {
  OuterConfig cfg;
  cfg.algorithm = Algorithm::kIsqaPlus;
  cfg.hessian_kind = HessianKind::kIdentity;
  cfg.subsolver = SubsolverKind::kPg;
  cfg.t_inner = 1;
  cfg.inner_max = 1;  // one prox step is the exact solution for H = l_hat I
  cfg.s_trigger = max_outer + 1;  // stay in the first stage
  cfg.tol = tol;
  cfg.max_outer = max_outer;
  cfg.record_iterates = true;
  return run(prob, cfg);
}

}  // namespace

std::vector<RateVerdict> audit_rate_qlinear(std::uint64_t seed, std::size_t instances) {
  std::vector<RateVerdict> out;
  for (std::size_t k = 0; k < instances; ++k) {
    SyntheticSpec spec;
    spec.kind = SyntheticKind::kRandomStronglyConvexL1;
    spec.dimension = 20;
    spec.mu = 1.0;
    spec.seed = seed + 101 * k;
    const SyntheticInstance inst = gen_instance(spec);
    const CompositeProblem prob = inst.problem();
    const double zeta_sq = inst.sharpness.zeta * inst.sharpness.zeta;
    const double gamma = 1e-4;

    const SolveReport rep = run_identity_exact(prob, 1e-7, 300);
    Vector x_prev(prob.dim(), 0.0);
    double delta_prev = prob.value(x_prev) - inst.f_star;
    std::size_t checked = 0;
    for (std::size_t t = 0; t < rep.trace.size(); ++t) {
      const TraceRecord& rec = rep.trace[t];
      const Vector& x_next = rep.iterates[t];
      const double delta_next = rec.objective - inst.f_star;
      if (rec.stage == StageTag::kFirst && delta_prev > 1e-10 && delta_next > 1e-12) {
        const EtaMeasurement em =
            measure_eta_identity(prob, x_prev, x_next, prob.smooth->lipschitz_upper());
        const double h_norm = rec.h_norm_bound;
        const double factor = (zeta_sq <= h_norm) ? zeta_sq / (2.0 * h_norm)
                                                  : 1.0 - h_norm / (2.0 * zeta_sq);
        const double bound = 1.0 - (1.0 - em.eta) * rec.step_size * gamma * factor;
        out.push_back(make_verdict("qlinear-ratio", inst.name + "-t" + std::to_string(t),
                                   delta_next / delta_prev, bound));
        ++checked;
      }
      x_prev = x_next;
      delta_prev = delta_next;
    }
    out.push_back(make_verdict("qlinear-coverage", inst.name, 1.0,
                               checked >= 10 ? 1.0 : 0.0));
  }
  return out;
}

std::vector<RateVerdict> audit_rate_weaksharp(std::uint64_t seed) {
  std::vector<RateVerdict> out;
  std::mt19937_64 rng(seed + 77);
  const Vector c{0.5, 1.0, 2.0, 0.75, 1.5};
  auto smooth = std::make_shared<SeparableQuadratic>(c, Vector(5, 0.0));
  auto reg = std::make_shared<L1Regularizer>(1.0);
  const CompositeProblem prob{smooth.get(), reg.get()};
  const double f_star = 0.0;  // unique minimizer at the origin
  const double zeta = 1.0, gamma = 1e-4;
  const double m_tilde = smooth->lipschitz_upper();
  const double threshold = zeta * zeta / m_tilde;  // eq-bound level for theta = 1

  OuterConfig cfg;
  cfg.hessian_kind = HessianKind::kIdentity;
  cfg.subsolver = SubsolverKind::kPg;
  cfg.t_inner = 1;
  cfg.inner_max = 1;
  cfg.s_trigger = 1000;
  cfg.tol = 0.0;
  cfg.max_outer = 60;
  cfg.record_iterates = true;

  // some starts jump across (0, threshold] straight to the minimizer, where
  // the theorem holds vacuously; redraw until a witness trajectory exists
  std::size_t checked = 0;
  double final_objective = 1.0;
  for (int attempt = 0; attempt < 16 && checked == 0; ++attempt) {
    Vector x0(5);
    for (double& v : x0) v = -3.0 + 6.0 * uniform(rng);
    const SolveReport rep = run(prob, cfg, x0);
    double delta_prev = prob.value(x0) - f_star;
    bool past_threshold = delta_prev <= threshold;
    Vector x_prev = x0;
    std::vector<RateVerdict> ratios;
    for (std::size_t t = 0; t < rep.trace.size(); ++t) {
      const double delta_next = rep.trace[t].objective - f_star;
      if (past_threshold && delta_prev > 0.0) {
        const EtaMeasurement em =
            measure_eta_identity(prob, x_prev, rep.iterates[t], m_tilde);
        const double bound =
            1.0 - (1.0 - em.eta) * rep.trace[t].step_size * gamma / 2.0;
        ratios.push_back(make_verdict("weaksharp-ratio",
                                      "weaksharp-t" + std::to_string(t),
                                      delta_next / delta_prev, bound));
      }
      if (delta_next <= threshold) past_threshold = true;
      delta_prev = delta_next;
      x_prev = rep.iterates[t];
    }
    checked = ratios.size();
    final_objective = rep.trace.empty() ? 1.0 : rep.trace.back().objective;
    out.insert(out.end(), ratios.begin(), ratios.end());
  }
  out.push_back(
      make_verdict("weaksharp-coverage", "weaksharp", 1.0, checked >= 1 ? 1.0 : 0.0));
  // below the threshold the proximal step terminates finitely: the gap
  // reaches exactly zero, the hallmark of the theta = 1 regime
  out.push_back(make_verdict("weaksharp-finite-termination", "weaksharp",
                             final_objective, 0.0));
  return out;
}

std::vector<RateVerdict> audit_rate_sublinear() {
  std::vector<RateVerdict> out;
  SyntheticSpec spec;
  spec.kind = SyntheticKind::kDegeneratePsdL1;
  spec.degenerate_power = 4;
  spec.lambda = 0.3;
  const SyntheticInstance inst = gen_instance(spec);
  const CompositeProblem prob = inst.problem();

  OuterConfig cfg;
  cfg.hessian_kind = HessianKind::kIdentity;
  cfg.subsolver = SubsolverKind::kPg;
  cfg.t_inner = 1;
  cfg.inner_max = 1;
  cfg.s_trigger = 100000;
  cfg.tol = 0.0;
  cfg.max_outer = 4000;
  const SolveReport rep = run(prob, cfg);

  Vector log_t, log_delta;
  for (std::size_t t = 1500; t < rep.trace.size(); ++t) {
    const double delta = rep.trace[t].objective - inst.f_star;
    if (delta > 1e-13) {
      log_t.push_back(std::log(static_cast<double>(t + 1)));
      log_delta.push_back(std::log(delta));
    }
  }
  const double slope = fit_slope(log_t, log_delta);
  const double target = -1.0 / (1.0 - 2.0 * inst.sharpness.theta);  // -2 for theta=1/4
  out.push_back(make_verdict("sublinear-slope-upper", inst.name, slope, 0.75 * target));
  out.push_back(make_verdict("sublinear-slope-lower", inst.name, 1.25 * target, slope));
  return out;
}

std::vector<RateVerdict> audit_superlinear(std::uint64_t seed) {
  std::vector<RateVerdict> out;
  for (double rho : {0.5, 1.0}) {
    SyntheticSpec spec;
    spec.kind = SyntheticKind::kRandomStronglyConvexL1;
    spec.dimension = 30;
    spec.mu = 1.0;
    spec.seed = seed + (rho == 0.5 ? 0 : 1);
    const SyntheticInstance inst = gen_instance(spec);

    OuterConfig cfg;
    cfg.algorithm = Algorithm::kIsqaPlus;
    // identity-metric first stage: slow enough that the support settles
    // while the error is still large, leaving room for several measurable
    // superlinear hops before the arithmetic floor
    cfg.hessian_kind = HessianKind::kIdentity;
    cfg.subsolver = SubsolverKind::kPg;
    cfg.t_inner = 1;
    cfg.inner_max = 1;
    cfg.s_trigger = 1;  // enter stage two while the error is still visible
    cfg.tol = 1e-15;    // below the floor so every hop completes its pair
    cfg.max_outer = 200;
    cfg.record_iterates = true;
    cfg.seed = seed;
    cfg.tssn.rho = rho;
    // a full PCG budget keeps the Newton residual constant stable, so the
    // fitted exponent is not polluted by truncation noise
    cfg.tssn.pcg_initial_budget = 2 * spec.dimension;

    // one sample per completed unit-step hop: x^t followed by an accepted
    // manifold step and the alternating proximal-gradient step
    Vector lx, ly, px, py;
    const auto collect = [&](const SolveReport& rep) {
      for (std::size_t t = 0; t + 2 < rep.trace.size(); ++t) {
        if (rep.trace[t + 1].stage != StageTag::kMo ||
            rep.trace[t + 1].step_size != 1.0 ||
            rep.trace[t + 2].stage != StageTag::kPg)
          continue;
        const double e0 = nrm2(rep.iterates[t] - inst.solution);
        const double e2 = nrm2(rep.iterates[t + 2] - inst.solution);
        if (!(e0 >= 1e-13 && e0 <= 1.0 && e2 <= 0.9 * e0)) continue;
        if (e2 >= 1e-13) {
          lx.push_back(std::log(e0));
          ly.push_back(std::log(e2));
        } else if (e2 >= 3e-15) {
          // landing at the arithmetic noise plateau under-reports the drop;
          // such hops are admitted only when clean ones are scarce
          px.push_back(std::log(e0));
          py.push_back(std::log(e2));
        }
      }
    };
    collect(run(inst.problem(), cfg));
    if (lx.size() < 3) {
      // harvest extra hops of the same map from a warm start on the
      // identified manifold, staggered below the cold run's entry level
      Vector warm = inst.solution;
      for (double& v : warm) v *= 1.05;
      collect(run(inst.problem(), cfg, warm));
    }
    for (std::size_t k = 0; lx.size() < 3 && k < px.size(); ++k) {
      lx.push_back(px[k]);
      ly.push_back(py[k]);
    }
    const std::string id = inst.name + "-rho" + std::to_string(rho);
    const double required = (rho == 0.5) ? 1.4 : 1.8;
    if (lx.size() < 3) {
      out.push_back(make_verdict("superlinear-pairs", id, 3.0,
                                 static_cast<double>(lx.size())));
      continue;
    }
    // fit over the trailing pairs
    const std::size_t keep = std::min<std::size_t>(lx.size(), 4);
    Vector fx(lx.end() - keep, lx.end()), fy(ly.end() - keep, ly.end());
    const double slope = fit_slope(fx, fy);
    out.push_back(make_verdict("superlinear-exponent", id, -slope, -required));
  }
  return out;
}

// ---------------------------------------------------------------------------
// structural

std::vector<RateVerdict> audit_structural(const std::vector<TraceRecord>& trace,
                                          const std::string& instance) {
  std::vector<RateVerdict> out;
  double worst_increase = 0.0;
  double worst_alpha_dev = 0.0;
  std::size_t consecutive_mo = 0;
  double worst_kt = 0.0;
  std::size_t non_mo_seen = 0;
  bool prev_mo = false;
  for (std::size_t t = 0; t < trace.size(); ++t) {
    const TraceRecord& rec = trace[t];
    if (t > 0)
      worst_increase = std::max(worst_increase,
                                rec.objective - trace[t - 1].objective);
    const bool is_mo = rec.stage == StageTag::kMo || rec.stage == StageTag::kMoFail;
    if (rec.stage == StageTag::kFirst)
      worst_alpha_dev = std::max(worst_alpha_dev, std::fabs(rec.step_size - 1.0));
    if (is_mo && prev_mo) ++consecutive_mo;
    prev_mo = is_mo;
    if (!is_mo) {
      // k_i is the global index of the i-th non-MO iteration
      worst_kt = std::max(worst_kt, static_cast<double>(t) -
                                        2.0 * static_cast<double>(non_mo_seen));
      ++non_mo_seen;
    }
  }
  out.push_back(make_verdict("objective-nonincreasing", instance, worst_increase, 0.0));
  out.push_back(make_verdict("first-stage-unit-steps", instance, worst_alpha_dev, 0.0));
  out.push_back(make_verdict("no-consecutive-mo", instance,
                             static_cast<double>(consecutive_mo), 0.0));
  out.push_back(make_verdict("kt-le-2t", instance, worst_kt, 0.0));
  return out;
}

std::vector<RateVerdict> audit_structural_suite(std::uint64_t seed) {
  std::vector<RateVerdict> out;
  struct Case {
    HessianKind hess;
    SubsolverKind sub;
  };
  const Case cases[] = {{HessianKind::kLbfgs, SubsolverKind::kRpcd},
                        {HessianKind::kNewton, SubsolverKind::kSparsa},
                        {HessianKind::kLbfgs, SubsolverKind::kApg},
                        {HessianKind::kNewton, SubsolverKind::kRpcd}};
  for (std::size_t c = 0; c < 4; ++c) {
    const SyntheticInstance inst =
        (c < 2) ? example1_instance()
                : gen_instance({SyntheticKind::kRandomStronglyConvexL1, 30, 1.0, 10.0,
                                1.0, seed + c, 4});
    OuterConfig cfg;
    cfg.hessian_kind = cases[c].hess;
    cfg.subsolver = cases[c].sub;
    cfg.tol = 1e-11;
    cfg.max_outer = 400;
    cfg.seed = seed + c;
    const SolveReport rep = run(inst.problem(), cfg);
    auto verdicts = audit_structural(
        rep.trace, inst.name + "-" + to_string(cases[c].sub));
    out.insert(out.end(), verdicts.begin(), verdicts.end());
  }
  return out;
}

}  // namespace isqa
