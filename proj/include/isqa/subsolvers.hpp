#pragma once

#include <cstdint>
#include <string>

#include "isqa/quadratic_model.hpp"

namespace isqa {

enum class SubsolverKind { kPg, kApg, kRpcd, kSparsa };

SubsolverKind subsolver_from_string(const std::string& name);
std::string to_string(SubsolverKind kind);

struct SubsolverBudget {
  std::size_t min_iterations = 5;   // T
  std::size_t max_iterations = 100;
  StopCriterion criterion;
  std::uint64_t rng_seed = 0;
};

/// Result of an inner solve. Every solver returns a point with Q(p) <= 0
/// whose final step is a proximal application; the pre-prox point and the
/// diagonal metric of that application are recorded so the proximal form of
/// the update can be verified.
struct SubsolveResult {
  Vector p;
  std::size_t iterations = 0;  // prox steps (epochs for the coordinate solver)
  double q_value = 0.0;
  bool criterion_met = false;
  Vector pre_prox_point;  // p-space iterate the final prox was applied from
  Vector prox_metric;     // diagonal Lambda of that prox
};

SubsolveResult solve_pg(const QuadraticModel& model, const SubsolverBudget& budget);
SubsolveResult solve_apg(const QuadraticModel& model, const SubsolverBudget& budget);
SubsolveResult solve_rpcd(const QuadraticModel& model, const SubsolverBudget& budget);
SubsolveResult solve_sparsa(const QuadraticModel& model, const SubsolverBudget& budget);

SubsolveResult solve_subproblem(SubsolverKind kind, const QuadraticModel& model,
                                const SubsolverBudget& budget);

}  // namespace isqa
