#pragma once

#include "uavsense/ew_codec.hpp"
#include "uavsense/scene_model.hpp"
#include "uavsense/types.hpp"

#include <vector>

namespace uavsense {

/// Conversion between rate units and whole coded symbols.
struct SymbolGrid {
  int symbolSize = 256;           // bytes per symbol
  double frameInterval = 1.0;     // seconds per frame
  double bytesPerRateUnit = 1.0;  // bytes/s carried by one rate unit

  int symbolsFor(double rate) const;
  double rateFor(int symbols) const;
};

struct ChannelBudget {
  int sentCount = 0;         // coded symbols transmitted per frame, T
  double erasureRate = 0.0;  // i.i.d. Bernoulli erasure probability
};

struct ProbEstimatorConfig {
  PrefixEstimator mode = PrefixEstimator::ExactRank;
  int trials = 10000;
  std::uint64_t seed = 1;  // reused across all evaluations of one run
};

struct LayeredOptConfig {
  int layers = 4;             // L
  double deltaLambda = 0.05;  // coordinate step on the window distribution
  SymbolGrid grid;
  ProbEstimatorConfig estimator;
  ChannelBudget budget;
  bool refineRates = false;  // optional symbol-grid search after the descent
};

struct LayeredDesign {
  LayerAllocation allocation;
  WindowDistribution lambda;
  double expectedDistortion = 1.0;
  std::vector<double> trace;  // objective at init and after each accepted move
  std::vector<Vec> lambdaTrace;
};

/// Expected distortion sum_{l=0..L} P_l D(x_l) with x_l the cumulative
/// source rate of the first l layers and P_l the prefix-decode distribution
/// under the configured channel budget. Deterministic given the config seed.
double evalObjective(const LayeredDesign& design,
                     const DistortionModel& distortion,
                     const LayeredOptConfig& config);

/// Equal split of the total rate across layers, quantized to whole symbols
/// (earlier layers absorb the remainder, the residual rate is credited to
/// the last layer so the rates still sum to the input).
LayerAllocation initialLayerRates(double totalRate, int layers,
                                  const LayeredOptConfig& config);

/// Minimizer of the P-free fixed-lambda subproblem, provided as a
/// diagnostic: without the decode probabilities every term improves with
/// cumulative rate, so the whole budget piles into layer 1.
LayerAllocation degenerateFixedLambdaRates(double totalRate, int layers,
                                           const LayeredOptConfig& config);

/// Greedy coordinate descent on the window distribution: start from
/// (1, 0, ..., 0), repeatedly shift deltaLambda rightward while the
/// objective strictly decreases. Accepted moves append to the trace;
/// rejected moves restore lambda bit-exactly.
LayeredDesign coordinateDescent(const DistortionModel& distortion,
                                double totalRate,
                                const LayeredOptConfig& config);

}  // namespace uavsense
