#pragma once

#include "uavsense/scene_model.hpp"
#include "uavsense/types.hpp"

namespace uavsense {

struct AllocationConfig {
  double constraintTol = 1e-6;  // session-bound violation tolerance
  double dualGapTol = 1e-6;     // relative primal-dual gap
  int maxIter = 10000;          // outer subgradient iterations
  double stepScale = 0.1;       // c in the diminishing step c/t
};

struct AllocationResult {
  SamplingRateVector rates;
  double objective = 0.0;       // sum_i alpha_i exp(-beta_i R_i)
  Vec sessionDistortions;       // D_k at the solution
  double capacityMultiplier = 0.0;  // mu
  Vec sessionMultipliers;           // nu_k
  double kktResidual = 0.0;
  int iterations = 0;
};

struct WaterfillResult {
  Vec rates;
  double mu = 0.0;
};

/// Closed-form KKT point of min sum_i alpha_i exp(-beta_i R_i) subject to
/// sum R_i = C, R >= 0: R_i = max(0, ln(alpha_i beta_i / mu) / beta_i) with
/// mu located by bisection and refined on the resolved active set. Entries
/// with alpha_i = 0 receive R_i = 0.
WaterfillResult waterfill(const Vec& alpha, const Vec& beta, double capacity);

/// Full problem of the reduced objective with session quality bounds,
/// solved by projected dual subgradient on the session multipliers (step
/// c/t, analytic water-filling inner solution) plus an active-set Newton
/// refinement that drives the KKT residual below tolerance.
AllocationResult solveAllocation(const ScenarioSpec& scenario,
                                 const AggregatedWeights& weights,
                                 const AllocationConfig& config = {});

/// Exhaustive minimizer over the simplex grid {0, step, ...}^N with
/// sum <= C, session-infeasible points discarded. Lexicographically
/// smallest rate vector wins ties. Desk-scale validation oracle, N <= 4.
AllocationResult bruteForceAllocation(const ScenarioSpec& scenario,
                                      const AggregatedWeights& weights,
                                      double gridStep);

}  // namespace uavsense
