#include "uavsense/layered_opt.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace uavsense {

int SymbolGrid::symbolsFor(double rate) const {
  if (rate < 0.0) throw ConfigError("rate must be non-negative");
  return static_cast<int>(
      std::floor(rate * frameInterval * bytesPerRateUnit / symbolSize + 1e-9));
}

double SymbolGrid::rateFor(int symbols) const {
  return static_cast<double>(symbols) * symbolSize /
         (frameInterval * bytesPerRateUnit);
}

double evalObjective(const LayeredDesign& design,
                     const DistortionModel& distortion,
                     const LayeredOptConfig& config) {
  const Vec p = estimatePrefixProbabilities(
      design.lambda, design.allocation.sourceSymbolCounts,
      config.budget.sentCount, config.budget.erasureRate,
      config.estimator.trials, config.estimator.seed, config.estimator.mode);
  double objective = p[0];  // D(0) = 1
  double cumulative = 0.0;
  for (int l = 0; l < design.allocation.layers(); ++l) {
    cumulative += design.allocation.layerRates[l];
    objective += p[l + 1] * evalDistortion(distortion, cumulative);
  }
  return objective;
}

LayerAllocation initialLayerRates(double totalRate, int layers,
                                  const LayeredOptConfig& config) {
  if (!(totalRate > 0.0)) throw ConfigError("total rate must be positive");
  if (layers < 1) throw ConfigError("layer count must be >= 1");
  const int symbols = config.grid.symbolsFor(totalRate);
  if (symbols < layers)
    throw ConfigError("rate too small for " + std::to_string(layers) +
                      " layers");
  LayerAllocation alloc;
  alloc.symbolSize = config.grid.symbolSize;
  alloc.sourceSymbolCounts.resize(layers);
  const int base = symbols / layers;
  const int extra = symbols % layers;
  for (int l = 0; l < layers; ++l)
    alloc.sourceSymbolCounts[l] = base + (l < extra ? 1 : 0);
  alloc.layerRates = Vec(layers);
  for (int l = 0; l < layers; ++l)
    alloc.layerRates[l] = config.grid.rateFor(alloc.sourceSymbolCounts[l]);
  // Sub-symbol residual credited to the last layer.
  alloc.layerRates[layers - 1] += totalRate - config.grid.rateFor(symbols);
  return alloc;
}

LayerAllocation degenerateFixedLambdaRates(double totalRate, int layers,
                                           const LayeredOptConfig& config) {
  if (!(totalRate > 0.0)) throw ConfigError("total rate must be positive");
  if (layers < 1) throw ConfigError("layer count must be >= 1");
  const int symbols = config.grid.symbolsFor(totalRate);
  if (symbols < 1) throw ConfigError("rate too small for 1 symbol");
  LayerAllocation alloc;
  alloc.symbolSize = config.grid.symbolSize;
  alloc.sourceSymbolCounts.assign(layers, 0);
  alloc.sourceSymbolCounts[0] = symbols;
  alloc.layerRates = Vec::Zero(layers);
  alloc.layerRates[0] = totalRate;
  return alloc;
}

namespace {

bool lambdaConsistentWithCounts(const Vec& lambda,
                                const std::vector<int>& counts) {
  int cum = 0;
  for (std::size_t l = 0; l < counts.size(); ++l) {
    cum += counts[l];
    if (lambda[static_cast<Eigen::Index>(l)] > 0.0 && cum == 0) return false;
  }
  return true;
}

// One-symbol hill climb on the layer counts, re-evaluating the full
// objective. Extension beyond the base descent, off by default.
void refineLayerRates(LayeredDesign& design, const DistortionModel& distortion,
                      const LayeredOptConfig& config, double totalRate) {
  const int layers = design.allocation.layers();
  if (layers < 2) return;
  const int totalSymbols = design.allocation.totalSymbols();
  const double residual = totalRate - config.grid.rateFor(totalSymbols);

  auto rebuild = [&](const std::vector<int>& counts) {
    LayerAllocation alloc;
    alloc.symbolSize = config.grid.symbolSize;
    alloc.sourceSymbolCounts = counts;
    alloc.layerRates = Vec(layers);
    for (int l = 0; l < layers; ++l)
      alloc.layerRates[l] = config.grid.rateFor(counts[l]);
    alloc.layerRates[layers - 1] += residual;
    return alloc;
  };

  bool improved = true;
  for (int pass = 0; pass < 4 * layers && improved; ++pass) {
    improved = false;
    for (int from = 0; from < layers; ++from) {
      for (int to = 0; to < layers; ++to) {
        if (from == to || design.allocation.sourceSymbolCounts[from] == 0)
          continue;
        std::vector<int> counts = design.allocation.sourceSymbolCounts;
        --counts[from];
        ++counts[to];
        if (!lambdaConsistentWithCounts(design.lambda.lambda, counts)) continue;
        LayeredDesign candidate = design;
        candidate.allocation = rebuild(counts);
        const double obj = evalObjective(candidate, distortion, config);
        if (obj < design.expectedDistortion) {
          design.allocation = candidate.allocation;
          design.expectedDistortion = obj;
          design.trace.push_back(obj);
          design.lambdaTrace.push_back(design.lambda.lambda);
          improved = true;
        }
      }
    }
  }
}

}  // namespace

LayeredDesign coordinateDescent(const DistortionModel& distortion,
                                double totalRate,
                                const LayeredOptConfig& config) {
  if (!(config.deltaLambda > 0.0 && config.deltaLambda <= 1.0))
    throw ConfigError("delta lambda must lie in (0, 1]");
  const int layers = config.layers;

  LayeredDesign design;
  design.allocation = initialLayerRates(totalRate, layers, config);
  Vec lambda = Vec::Zero(layers);
  lambda[0] = 1.0;
  design.lambda = WindowDistribution{lambda};

  double dMax = evalObjective(design, distortion, config);
  design.trace.push_back(dMax);
  design.lambdaTrace.push_back(design.lambda.lambda);

  const double step = config.deltaLambda;
  for (int i = 0; i + 1 < layers; ++i) {
    bool improvedAtIndex = false;
    while (true) {
      Vec& lam = design.lambda.lambda;
      const double oldI = lam[i];
      const double oldNext = lam[i + 1];
      double moved = lam[i] - step;
      if (moved < 0.0) {
        if (moved < -1e-9) break;  // drift guard; the loop exit keeps mass >= 0
        moved = 0.0;
      }
      lam[i] = moved;
      lam[i + 1] = oldNext + (oldI - moved);
      const double d = evalObjective(design, distortion, config);
      if (d < dMax) {
        dMax = d;
        improvedAtIndex = true;
        design.trace.push_back(d);
        design.lambdaTrace.push_back(lam);
      } else {
        lam[i] = oldI;
        lam[i + 1] = oldNext;
        break;
      }
      if (lam[i] <= step) break;
    }
    if (!improvedAtIndex) break;
  }

  design.expectedDistortion = dMax;
  if (config.refineRates) refineLayerRates(design, distortion, config, totalRate);
  return design;
}

}  // namespace uavsense
