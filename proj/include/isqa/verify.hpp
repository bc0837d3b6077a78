#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "isqa/outer_loop.hpp"
#include "isqa/quadratic_model.hpp"
#include "isqa/synthetic.hpp"

namespace isqa {

/// One audited claim: pass iff measured <= bound up to 1e-9 relative slack.
struct RateVerdict {
  std::string claim;
  std::string instance;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
  double margin = 0.0;
};

RateVerdict make_verdict(std::string claim, std::string instance, double measured,
                         double bound);
bool all_pass(const std::vector<RateVerdict>& verdicts);

/// Dense symmetric operator with externally certified spectral bounds;
/// audit and test plumbing.
class DenseOperator final : public HessianOperator {
 public:
  DenseOperator(DenseMatrix m, double eig_min, double eig_max);
  std::size_t dim() const override { return m_.rows(); }
  void apply(const Vector& v, Vector& out) const override { out = m_.apply(v); }
  Vector diagonal() const override;
  double norm_bound() const override { return eig_max_; }
  double strong_convexity_bound() const override { return eig_min_; }
  std::unique_ptr<HessianCoordinateState> coordinate_state() const override;

 private:
  DenseMatrix m_;
  double eig_min_, eig_max_;
};

/// Independent Q* oracle: proximal-gradient iterations on the subproblem
/// until the prox-gradient norm hits machine floor (up to max_iterations).
double oracle_q_star(const QuadraticModel& model,
                     std::size_t max_iterations = 1000000);

/// Verifies the descent-lemma chains
///   ||r||^2 >= 2m (Q(p) - Q*) >= (m/M) G_tau(p)^2   and
///   G_tau(p)^2 >= tau K^{-1} (Q(pbar_tau) - Q*)
/// on seeded random subproblem instances with oracle Q*.
std::vector<RateVerdict> audit_inequalities(std::uint64_t seed,
                                            std::size_t instances = 200);

struct IdentificationReport {
  bool identified = false;        // final pattern equals the target support
  std::size_t first_iteration = 0;
  bool persistent = false;        // stays identified until termination
};
IdentificationReport audit_identification(const std::vector<SupportPattern>& history,
                                          const SupportPattern& target);

/// Final-support identification for every subsolver on seeded strongly
/// convex instances, plus the handcrafted non-identifying sequence.
std::vector<RateVerdict> audit_identification_suite(std::uint64_t seed,
                                                    std::size_t instances = 20);

/// Per-iteration Q-linear contraction bound (theta = 1/2) with measured
/// step sizes, the norm bound of H_t, and oracle-measured inner accuracy.
std::vector<RateVerdict> audit_rate_qlinear(std::uint64_t seed,
                                            std::size_t instances = 3);

/// Weak-sharp (theta = 1) tail contraction after the bound threshold.
std::vector<RateVerdict> audit_rate_weaksharp(std::uint64_t seed);

/// Sublinear regime (theta = 1/4): log-log slope of the objective gap
/// against -1/(1-2 theta) within 25%.
std::vector<RateVerdict> audit_rate_sublinear();

/// Two-step superlinear diagnostic: fitted exponent of ||x^{t+2}-x*|| vs
/// ||x^t-x*|| over the trailing second-stage pairs, for rho = 0.5 and 1.
std::vector<RateVerdict> audit_superlinear(std::uint64_t seed);

/// Structural trace checks: F nonincreasing, unit first-stage steps, no two
/// consecutive manifold-optimization attempts (k_t <= 2t).
std::vector<RateVerdict> audit_structural(const std::vector<TraceRecord>& trace,
                                          const std::string& instance);
std::vector<RateVerdict> audit_structural_suite(std::uint64_t seed);

}  // namespace isqa
