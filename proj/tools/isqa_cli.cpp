// Command-line driver: solve / reference / verify on LIBSVM data or the
// built-in instances.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "isqa/outer_loop.hpp"
#include "isqa/problem.hpp"
#include "isqa/synthetic.hpp"
#include "isqa/verify.hpp"

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct SolveArgs {
  std::string data;
  std::string builtin;
  double lambda = 1.0;
  std::string algo = "isqa+-lbfgs";
  std::string subsolver = "rpcd";
  std::size_t s_trigger = 10;
  std::size_t t_inner = 5;
  double tol = 1e-8;
  std::size_t max_iter = 1000;
  double max_seconds = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
  std::string fstar;
  std::string trace_path;
  std::string report_path;
  std::size_t features = 0;
};

struct LoadedProblem {
  std::shared_ptr<isqa::SmoothFunction> smooth;
  std::shared_ptr<isqa::L1Regularizer> reg;
  std::string dataset;
  std::string checksum;
  isqa::CompositeProblem problem() const { return {smooth.get(), reg.get()}; }
};

LoadedProblem load_problem(const SolveArgs& a) {
  LoadedProblem lp;
  if (!a.builtin.empty()) {
    if (a.builtin != "example1")
      throw std::runtime_error("unknown builtin instance '" + a.builtin + "'");
    const isqa::SyntheticInstance inst = isqa::example1_instance();
    lp.smooth = inst.smooth;
    lp.reg = inst.reg;
    lp.dataset = "builtin:example1";
    lp.checksum = "0";
    return lp;
  }
  if (a.data.empty()) throw std::runtime_error("one of --data or --builtin is required");
  const std::string bytes = read_file(a.data);
  const isqa::LibsvmData parsed = isqa::parse_libsvm(bytes, a.features);
  lp.smooth = std::make_shared<isqa::LogisticProblem>(parsed.matrix, parsed.labels,
                                                      a.lambda);
  lp.reg = std::make_shared<isqa::L1Regularizer>(a.lambda);
  lp.dataset = a.data;
  char hex[24];
  std::snprintf(hex, sizeof(hex), "%016" PRIx64, fnv1a(bytes));
  lp.checksum = hex;
  return lp;
}

isqa::OuterConfig config_from_args(const SolveArgs& a) {
  isqa::OuterConfig cfg;
  if (a.algo == "isqa-lbfgs" || a.algo == "isqa+-lbfgs")
    cfg.hessian_kind = isqa::HessianKind::kLbfgs;
  else if (a.algo == "isqa-newton" || a.algo == "isqa+-newton")
    cfg.hessian_kind = isqa::HessianKind::kNewton;
  else
    throw std::runtime_error("unknown --algo '" + a.algo + "'");
  cfg.algorithm = a.algo.rfind("isqa+", 0) == 0 ? isqa::Algorithm::kIsqaPlus
                                                : isqa::Algorithm::kIsqa;
  cfg.subsolver = isqa::subsolver_from_string(a.subsolver);
  cfg.s_trigger = a.s_trigger;
  cfg.t_inner = a.t_inner;
  cfg.tol = a.tol;
  cfg.max_outer = a.max_iter;
  cfg.max_seconds = a.max_seconds;
  cfg.seed = a.seed;
  return cfg;
}

std::optional<double> resolve_fstar(const std::string& spec) {
  if (spec.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(spec, &used);
    if (used == spec.size()) return v;
  } catch (...) {
  }
  const json j = json::parse(read_file(spec));
  return j.at("value").get<double>();
}

// MANIFOLD_ISQA_DETERMINISTIC_TIME=1 zeroes wall-clock fields so that
// identical seeds and flags give byte-identical outputs.
bool deterministic_time() {
  const char* env = std::getenv("MANIFOLD_ISQA_DETERMINISTIC_TIME");
  return env && env[0] == '1';
}

void write_trace_csv(const std::string& path, const isqa::SolveReport& rep) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  const bool fixed_time = deterministic_time();
  out << "iter,seconds,objective,rel_gap,nnz,stage,alpha,prox_grad_norm,"
         "inner_iters,enlargements\n";
  for (const auto& r : rep.trace) {
    out << r.iteration << ','
        << format_double(fixed_time ? 0.0 : r.wall_seconds) << ','
        << format_double(r.objective) << ',';
    if (rep.f_star)
      out << format_double(r.rel_gap);
    else
      out << "na";
    out << ',' << r.nnz << ',' << to_string(r.stage) << ','
        << format_double(r.step_size) << ',' << format_double(r.prox_grad_norm) << ','
        << r.inner_iterations << ',' << r.enlargements << '\n';
    out.flush();
  }
}

json manifest_json(const SolveArgs& a, const LoadedProblem& lp) {
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  return json{
      {"dataset", lp.dataset},
      {"checksum", lp.checksum},
      {"lambda", a.lambda},
      {"algo", a.algo},
      {"subsolver", a.subsolver},
      {"S", a.s_trigger},
      {"T", a.t_inner},
      {"tol", a.tol},
      {"max_iter", a.max_iter},
      // JSON has no infinity; negative means unbounded
      {"max_seconds", std::isfinite(a.max_seconds) ? a.max_seconds : -1.0},
      {"seed", a.seed},
      {"features", a.features},
      {"fstar", a.fstar},
      {"version", "1.0.0"},
      {"started_unix_ms",
       deterministic_time()
           ? std::int64_t{0}
           : static_cast<std::int64_t>(
                 std::chrono::duration_cast<std::chrono::milliseconds>(now).count())},
  };
}

json report_json(const SolveArgs& a, const LoadedProblem& lp,
                 const isqa::SolveReport& rep) {
  json nonzeros = json::array();
  for (std::size_t i = 0; i < rep.x.size(); ++i)
    if (rep.x[i] != 0.0) nonzeros.push_back({i, rep.x[i]});
  const isqa::SupportPattern pattern = isqa::manifold_of(rep.x);
  json j{
      {"objective", rep.objective},
      {"f_value", rep.f_value},
      {"psi_value", rep.psi_value},
      {"prox_grad_norm", rep.final_prox_grad_norm},
      {"iterations", rep.iterations},
      {"termination", to_string(rep.termination)},
      {"nnz", nonzeros.size()},
      {"pattern_zero_set", pattern.zero_set},
      {"manifest", manifest_json(a, lp)},
  };
  if (rep.x.size() <= 32) j["x"] = rep.x;
  j["x_nonzeros"] = nonzeros;
  if (rep.f_star) j["f_star"] = *rep.f_star;
  return j;
}

int cmd_solve_run(const SolveArgs& a) {
  const LoadedProblem lp = load_problem(a);
  const isqa::OuterConfig cfg = config_from_args(a);
  const std::optional<double> fstar = resolve_fstar(a.fstar);
  const isqa::SolveReport rep = isqa::run(lp.problem(), cfg, {}, fstar);

  std::printf("termination=%s iterations=%zu objective=%.12g nnz=%zu ||G||=%.3g\n",
              to_string(rep.termination).c_str(), rep.iterations, rep.objective,
              isqa::count_nonzero(rep.x), rep.final_prox_grad_norm);
  if (rep.x.size() <= 10) {
    std::printf("x =");
    for (double v : rep.x) std::printf(" %.12g", v);
    std::printf("\n");
  }
  if (!a.trace_path.empty()) write_trace_csv(a.trace_path, rep);
  if (!a.report_path.empty()) {
    std::ofstream out(a.report_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + a.report_path + "'");
    out << report_json(a, lp, rep).dump(2) << '\n';
  }
  return 0;
}

SolveArgs args_from_manifest(const json& m) {
  SolveArgs a;
  const std::string dataset = m.at("dataset").get<std::string>();
  if (dataset.rfind("builtin:", 0) == 0)
    a.builtin = dataset.substr(8);
  else
    a.data = dataset;
  a.lambda = m.at("lambda").get<double>();
  a.algo = m.at("algo").get<std::string>();
  a.subsolver = m.at("subsolver").get<std::string>();
  a.s_trigger = m.at("S").get<std::size_t>();
  a.t_inner = m.at("T").get<std::size_t>();
  a.tol = m.at("tol").get<double>();
  a.max_iter = m.at("max_iter").get<std::size_t>();
  a.max_seconds = m.at("max_seconds").get<double>();
  if (a.max_seconds < 0.0)
    a.max_seconds = std::numeric_limits<double>::infinity();
  a.seed = m.at("seed").get<std::uint64_t>();
  a.features = m.at("features").get<std::size_t>();
  a.fstar = m.at("fstar").get<std::string>();
  return a;
}

int cmd_reference_run(const SolveArgs& a, const std::string& out_path,
                      std::size_t max_iter, double max_seconds) {
  const LoadedProblem lp = load_problem(a);
  const isqa::SolveReport rep =
      isqa::reference_run(lp.problem(), max_iter, max_seconds);
  json j{{"value", rep.objective},
         {"residual", rep.final_prox_grad_norm},
         {"iterations", rep.iterations},
         {"termination", to_string(rep.termination)}};
  if (out_path.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
    out << j.dump(2) << '\n';
  }
  std::printf("F* = %.16g (residual %.3g, %zu iterations)\n", rep.objective,
              rep.final_prox_grad_norm, rep.iterations);
  return 0;
}

int cmd_verify_run(const std::string& suite, std::uint64_t seed,
                   const std::string& out_path) {
  std::vector<isqa::RateVerdict> verdicts;
  const bool all = suite == "all";
  bool known = all;
  auto append = [&](std::vector<isqa::RateVerdict> v) {
    verdicts.insert(verdicts.end(), v.begin(), v.end());
  };
  if (all || suite == "inequalities") {
    append(isqa::audit_inequalities(seed));
    known = true;
  }
  if (all || suite == "identification") {
    append(isqa::audit_identification_suite(seed));
    known = true;
  }
  if (all || suite == "rates") {
    append(isqa::audit_rate_qlinear(seed));
    append(isqa::audit_rate_weaksharp(seed));
    append(isqa::audit_rate_sublinear());
    known = true;
  }
  if (all || suite == "superlinear") {
    append(isqa::audit_superlinear(seed));
    known = true;
  }
  if (all || suite == "structural") {
    append(isqa::audit_structural_suite(seed));
    known = true;
  }
  if (!known) throw CLI::ValidationError("--suite", "unknown suite '" + suite + "'");

  json out = json::array();
  std::size_t failures = 0;
  for (const auto& v : verdicts) {
    out.push_back(json{{"claim", v.claim},
                       {"instance", v.instance},
                       {"measured", v.measured},
                       {"bound", v.bound},
                       {"pass", v.pass},
                       {"margin", v.margin}});
    if (!v.pass) {
      ++failures;
      std::printf("FAIL %-28s %-34s measured=%.6g bound=%.6g\n", v.claim.c_str(),
                  v.instance.c_str(), v.measured, v.bound);
    }
  }
  std::printf("%zu/%zu checks passed\n", verdicts.size() - failures, verdicts.size());
  if (!out_path.empty()) {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + out_path + "'");
    f << out.dump(2) << '\n';
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage inexact proximal-Newton solver for l1-regularized "
               "logistic regression, with a verification harness"};
  app.require_subcommand(1);

  SolveArgs sa;
  std::string rerun_manifest;
  auto* solve = app.add_subcommand("solve", "minimize f(x) + lambda*||x||_1");
  solve->add_option("--data", sa.data, "LIBSVM-format dataset");
  solve->add_option("--builtin", sa.builtin, "built-in instance (example1)");
  solve->add_option("--lambda", sa.lambda, "regularization weight")->default_val(1.0);
  solve->add_option("--algo", sa.algo,
                    "isqa-lbfgs | isqa-newton | isqa+-lbfgs | isqa+-newton");
  solve->add_option("--subsolver", sa.subsolver, "pg | apg | rpcd | sparsa");
  solve->add_option("--S", sa.s_trigger, "unchanged-manifold trigger");
  solve->add_option("--T", sa.t_inner, "minimum inner iterations");
  solve->add_option("--tol", sa.tol, "prox-gradient norm tolerance");
  solve->add_option("--max-iter", sa.max_iter, "outer iteration budget");
  solve->add_option("--max-seconds", sa.max_seconds, "wall-clock budget");
  solve->add_option("--seed", sa.seed, "subsolver RNG seed");
  solve->add_option("--fstar", sa.fstar, "reference objective (value or file)");
  solve->add_option("--trace", sa.trace_path, "CSV trace output");
  solve->add_option("--report", sa.report_path, "JSON report output");
  solve->add_option("--features", sa.features, "feature-dimension override");
  solve->add_option("--rerun", rerun_manifest,
                    "rerun from a report manifest (overrides other flags)");

  SolveArgs ra;
  std::string ref_out;
  std::size_t ref_max_iter = 2000;
  double ref_max_seconds = 600.0;
  auto* ref = app.add_subcommand("reference", "high-accuracy F* run");
  ref->add_option("--data", ra.data, "LIBSVM-format dataset");
  ref->add_option("--builtin", ra.builtin, "built-in instance (example1)");
  ref->add_option("--lambda", ra.lambda, "regularization weight")->default_val(1.0);
  ref->add_option("--features", ra.features, "feature-dimension override");
  ref->add_option("--out", ref_out, "F* JSON output file");
  ref->add_option("--max-iter", ref_max_iter, "outer iteration budget");
  ref->add_option("--max-seconds", ref_max_seconds, "wall-clock budget");

  std::string suite = "all";
  std::uint64_t verify_seed = 7;
  std::string verify_out;
  auto* verify = app.add_subcommand("verify", "run audit suites");
  verify->add_option("--suite", suite,
                     "inequalities | identification | rates | superlinear | "
                     "structural | all");
  verify->add_option("--seed", verify_seed, "audit RNG seed");
  verify->add_option("--out", verify_out, "JSON verdict output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      if (!rerun_manifest.empty()) {
        const json report = json::parse(read_file(rerun_manifest));
        SolveArgs replay = args_from_manifest(report.at("manifest"));
        replay.trace_path = sa.trace_path;
        replay.report_path = sa.report_path;
        return cmd_solve_run(replay);
      }
      return cmd_solve_run(sa);
    }
    if (ref->parsed()) return cmd_reference_run(ra, ref_out, ref_max_iter, ref_max_seconds);
    if (verify->parsed()) return cmd_verify_run(suite, verify_seed, verify_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
