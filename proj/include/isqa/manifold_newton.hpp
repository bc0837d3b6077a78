#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "isqa/linalg.hpp"
#include "isqa/problem.hpp"
#include "isqa/regularizer.hpp"

namespace isqa {

/// Coordinate chart of the l1 active manifold at a base point: the free
/// (nonzero) coordinates parameterize the manifold, everything else is
/// pinned at zero.
struct Chart {
  std::vector<std::uint32_t> free_indices;  // sorted
  std::size_t full_dim = 0;
  std::vector<std::int8_t> base_signs;      // sign of the base point per free index

  std::size_t dim() const { return free_indices.size(); }
};

Chart make_chart(const Vector& x);
Vector restrict_to_chart(const Chart& chart, const Vector& full);
Vector embed_from_chart(const Chart& chart, const Vector& reduced);

/// Raised when a chart point has a free coordinate at exactly zero; callers
/// treat it as a manifold change.
class ChartDegenerate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TssnConfig {
  double c = 1e-6;
  double rho = 0.5;
  double alpha_floor = 9.5367431640625e-07;  // beta^20 with beta = 0.5
  double beta = 0.5;
  std::size_t pcg_initial_budget = 5;
};

/// grad of F restricted to the chart at y: grad f on the free coordinates
/// plus lambda * sign(y_i); uses the signs of y, not the chart's base signs.
Vector chart_gradient(const SmoothFunction& f, const L1Regularizer& reg,
                      const Chart& chart, const Vector& y);

/// (restricted generalized Hessian + mu I) v. Psi contributes no curvature
/// on the l1 manifold.
Vector reduced_hess_vec(const SmoothFunction& f, const Chart& chart, const Vector& y,
                        const Vector& v, double mu);

struct PcgResult {
  Vector q;
  std::size_t iterations = 0;
  double residual_norm = 0.0;
  bool met_tolerance = false;
  bool negative_curvature = false;
};

/// Preconditioned CG for H q = -g from q = 0, stopping at
/// ||H q + g|| <= tol_abs or at the iteration budget. Nonpositive curvature
/// aborts with the best iterate so far.
PcgResult pcg(const std::function<Vector(const Vector&)>& apply_h, const Vector& g,
              const Vector& preconditioner, double tol_abs, std::size_t budget);

enum class TssnStatus {
  kAccepted,        // step taken with alpha = 1
  kAcceptedDamped,  // step taken with alpha < 1; caller returns to stage one
  kFailNonDescent,
  kFailTinyStep,
  kFailDegenerateChart,
};

struct TssnOutcome {
  TssnStatus status = TssnStatus::kFailNonDescent;
  Vector x_new;
  double alpha = 0.0;
  double f_new = 0.0;         // F(x_new) when accepted
  double grad_norm = 0.0;     // ||g^t||
  double mu = 0.0;
  std::size_t pcg_iterations = 0;
  double pcg_residual = 0.0;
  bool pcg_met_tolerance = false;
};

/// One truncated semismooth Newton step on the chart of x. `f_at_x` is the
/// current objective value; `pcg_budget` the iteration bound of the inner
/// PCG solve. A zero reduced gradient is accepted trivially with x
/// unchanged. Sign flips of free coordinates during the line search are
/// evaluated exactly (F is globally defined); a coordinate landing exactly
/// at zero surfaces as a pattern change on the next iteration.
TssnOutcome tssn_step(const SmoothFunction& f, const L1Regularizer& reg,
                      const Vector& x, double f_at_x, const Chart& chart,
                      const TssnConfig& config, std::size_t pcg_budget);

}  // namespace isqa
