#pragma once

#include "uavsense/types.hpp"

#include <vector>

namespace uavsense {

/// One captured aerial viewpoint. `beta` is the exponent of the
/// distortion-rate law exp(-beta * R); `position` lives on the normalized
/// view axis [0, 1].
struct Viewpoint {
  int id = 0;
  double position = 0.0;
  double beta = 1.0;
};

/// A VR/AR session reconstructing one subarea from a cluster of viewpoints.
/// Popularity over the view axis is Gaussian (mean, stddev).
struct SessionSpec {
  int id = 0;
  std::vector<int> members;    // viewpoint ids, positions strictly increasing
  double priority = 1.0;       // gamma_k >= 0
  double maxDistortion = 1.0;  // D_k^0 in (0, 1]
  double popularityMean = 0.5;
  double popularityStd = 0.25;
};

struct ScenarioSpec {
  std::vector<Viewpoint> viewpoints;
  std::vector<SessionSpec> sessions;
  double capacity = 12.0;          // aggregate rate budget C, MB/s
  int dibrPolyDegree = 1;          // p
  double dibrSynthesisPenalty = 0.0;  // d0
  int quadratureGridSize = 512;    // G

  int uavCount() const { return static_cast<int>(viewpoints.size()); }
  int sessionCount() const { return static_cast<int>(sessions.size()); }

  /// Index of the viewpoint with the given id; throws ConfigError if absent.
  int viewpointIndex(int id) const;
};

/// Throws ConfigError describing the first violated invariant, if any.
void validateScenario(const ScenarioSpec& scenario);

/// Exponential distortion-rate law D(R) = exp(-beta R), D(0) = 1.
struct DistortionModel {
  double beta = 1.0;
};

double evalDistortion(const DistortionModel& model, double rate);

/// Distortion of a virtual view at relative position x between two captured
/// views: (1-x)^p dLeft + x^p dRight + d0 x(1-x), clamped to [0, 1].
double virtualViewDistortion(double x, double dLeft, double dRight, int p,
                             double d0);

/// Per-viewpoint weights of the reduced objective plus the per-session
/// synthesis-penalty constants. alpha folds session priorities;
/// alphaPerSession row k holds the session-local weights used by the
/// D_k <= D_k^0 constraints.
struct AggregatedWeights {
  Vec alpha;                 // N, priority-folded
  Mat alphaPerSession;       // K x N
  Vec synthesisConstant;     // K, popularity-weighted d0 term
};

/// Quadrature reduction of the per-session view-space integrals to
/// per-viewpoint weights. Cells are aligned to member positions so the
/// integrand is smooth within each cell; two-point Gauss-Legendre per cell.
AggregatedWeights aggregateWeights(const ScenarioSpec& scenario);

/// Same reduction on an explicit grid size (quadrature-convergence checks).
AggregatedWeights aggregateWeightsWithGrid(const ScenarioSpec& scenario,
                                           int gridSize);

/// Per-UAV sampling rates, the stage-one decision variable.
struct SamplingRateVector {
  Vec rates;
};

/// D_k = sum_i alphaPerSession(k,i) exp(-beta_i R_i) + synthesisConstant(k).
double sessionDistortion(const ScenarioSpec& scenario,
                         const AggregatedWeights& weights,
                         const SamplingRateVector& rates, int sessionIndex);

/// Value of the reduced swarm objective sum_i alpha_i exp(-beta_i R_i).
double swarmObjective(const ScenarioSpec& scenario,
                      const AggregatedWeights& weights,
                      const SamplingRateVector& rates);

}  // namespace uavsense
