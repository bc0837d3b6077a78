#include "isqa/manifold_newton.hpp"

#include <cmath>

namespace isqa {

Chart make_chart(const Vector& x) {
  Chart chart;
  chart.full_dim = x.size();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) {
      chart.free_indices.push_back(static_cast<std::uint32_t>(i));
      chart.base_signs.push_back(x[i] > 0.0 ? 1 : -1);
    }
  }
  return chart;
}

Vector restrict_to_chart(const Chart& chart, const Vector& full) {
  if (full.size() != chart.full_dim)
    throw std::invalid_argument("restrict_to_chart: size mismatch");
  Vector out(chart.dim());
  for (std::size_t k = 0; k < chart.dim(); ++k) out[k] = full[chart.free_indices[k]];
  return out;
}

Vector embed_from_chart(const Chart& chart, const Vector& reduced) {
  if (reduced.size() != chart.dim())
    throw std::invalid_argument("embed_from_chart: size mismatch");
  Vector out(chart.full_dim, 0.0);
  for (std::size_t k = 0; k < chart.dim(); ++k) out[chart.free_indices[k]] = reduced[k];
  return out;
}

Vector chart_gradient(const SmoothFunction& f, const L1Regularizer& reg,
                      const Chart& chart, const Vector& y) {
  for (std::size_t k = 0; k < y.size(); ++k)
    if (y[k] == 0.0)
      throw ChartDegenerate("chart_gradient: free coordinate at zero");
  const Vector x = embed_from_chart(chart, y);
  Vector g_full(chart.full_dim);
  f.gradient(x, g_full);
  Vector g = restrict_to_chart(chart, g_full);
  for (std::size_t k = 0; k < y.size(); ++k)
    g[k] += reg.lambda() * (y[k] > 0.0 ? 1.0 : -1.0);
  return g;
}

Vector reduced_hess_vec(const SmoothFunction& f, const Chart& chart, const Vector& y,
                        const Vector& v, double mu) {
  const Vector x = embed_from_chart(chart, y);
  const Vector v_full = embed_from_chart(chart, v);
  Vector hv_full;
  f.hess_vec(x, v_full, hv_full);
  Vector out = restrict_to_chart(chart, hv_full);
  if (mu != 0.0) axpy(mu, v, out);
  return out;
}

PcgResult pcg(const std::function<Vector(const Vector&)>& apply_h, const Vector& g,
              const Vector& preconditioner, double tol_abs, std::size_t budget) {
  const std::size_t n = g.size();
  PcgResult res;
  res.q.assign(n, 0.0);
  Vector r = g;  // residual of Hq = -g is -(Hq + g); track r = -(Hq+g)
  scal(-1.0, r);
  res.residual_norm = nrm2(r);
  if (res.residual_norm <= tol_abs) {
    res.met_tolerance = true;
    return res;
  }
  Vector z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / preconditioner[i];
  Vector d = z;
  double ztr = dot(z, r);
  while (res.iterations < budget) {
    const Vector hd = apply_h(d);
    const double dhd = dot(d, hd);
    if (dhd <= 0.0) {
      res.negative_curvature = true;
      break;
    }
    const double step = ztr / dhd;
    axpy(step, d, res.q);
    axpy(-step, hd, r);
    ++res.iterations;
    res.residual_norm = nrm2(r);
    if (res.residual_norm <= tol_abs) {
      res.met_tolerance = true;
      break;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / preconditioner[i];
    const double ztr_new = dot(z, r);
    const double beta = ztr_new / ztr;
    ztr = ztr_new;
    for (std::size_t i = 0; i < n; ++i) d[i] = z[i] + beta * d[i];
  }
  return res;
}

TssnOutcome tssn_step(const SmoothFunction& f, const L1Regularizer& reg,
                      const Vector& x, double f_at_x, const Chart& chart,
                      const TssnConfig& config, std::size_t pcg_budget) {
  TssnOutcome out;
  Vector y = restrict_to_chart(chart, x);
  Vector g;
  try {
    g = chart_gradient(f, reg, chart, y);
  } catch (const ChartDegenerate&) {
    out.status = TssnStatus::kFailDegenerateChart;
    return out;
  }
  out.grad_norm = nrm2(g);

  if (out.grad_norm == 0.0) {
    // stationary on the chart: q = 0 is accepted trivially
    out.status = TssnStatus::kAccepted;
    out.x_new = x;
    out.alpha = 1.0;
    out.f_new = f_at_x;
    return out;
  }

  out.mu = config.c * std::pow(out.grad_norm, config.rho);
  const double tol =
      0.1 * std::min(out.grad_norm, std::pow(out.grad_norm, 1.0 + config.rho));

  Vector precond;
  {
    const Vector x_chart = embed_from_chart(chart, y);
    Vector diag_full = f.hess_diagonal(x_chart);
    precond = restrict_to_chart(chart, diag_full);
    for (double& p : precond) p = std::max(p + out.mu, 1e-30);
  }
  const auto apply_h = [&](const Vector& v) {
    return reduced_hess_vec(f, chart, y, v, out.mu);
  };
  const PcgResult cg = pcg(apply_h, g, precond, tol, pcg_budget);
  out.pcg_iterations = cg.iterations;
  out.pcg_residual = cg.residual_norm;
  out.pcg_met_tolerance = cg.met_tolerance;

  if (dot(cg.q, g) >= 0.0) {
    out.status = TssnStatus::kFailNonDescent;
    return out;
  }

  double alpha = 1.0;
  while (true) {
    Vector y_trial = y;
    axpy(alpha, cg.q, y_trial);
    const Vector x_trial = embed_from_chart(chart, y_trial);
    const double f_trial = f.value(x_trial) + reg.value(x_trial);
    if (f_trial <= f_at_x) {
      out.status = alpha == 1.0 ? TssnStatus::kAccepted : TssnStatus::kAcceptedDamped;
      out.x_new = x_trial;
      out.alpha = alpha;
      out.f_new = f_trial;
      return out;
    }
    alpha *= config.beta;
    if (alpha <= config.alpha_floor) {
      out.status = TssnStatus::kFailTinyStep;
      return out;
    }
  }
}

}  // namespace isqa
