#pragma once

#include "uavsense/types.hpp"

#include <vector>

namespace uavsense {

struct Beam {
  double gain = 1.0;          // g
  double bandwidth = 1.0;     // W, in rate units
  double noiseDensity = 1.0;  // N0
};

/// One beam per scalable layer.
struct LinkModel {
  std::vector<Beam> beams;

  int beamCount() const { return static_cast<int>(beams.size()); }
};

/// Gaussian-channel rate law r(p) = W log2(1 + g p / (N0 W)).
double linkRate(double power, const Beam& beam);

/// Inverse of the rate law: p = (N0 W / g)(2^(R/W) - 1). Zero at R = 0,
/// strictly increasing and convex in R.
double rateToPower(double rate, const Beam& beam);

struct PowerSchedule {
  std::vector<int> assignment;  // layer l -> beam index
  Vec powers;                   // per layer
  double totalPower = 0.0;
  bool feasible = true;         // totalPower <= budget
};

/// Sort-based assignment: largest layer rate onto the cheapest beam
/// (power cost of a reference rate, ascending). With equal bandwidths the
/// cost separates as c(R) f(beam), so this matches the brute-force minimum
/// exactly. Infeasibility is a returned state, not an error.
PowerSchedule schedule(const Vec& layerRates, const LinkModel& links,
                       double powerBudget);

/// Exhaustive minimum over all L! layer-to-beam permutations, L <= 8.
/// Deterministic tie-break: lexicographically smallest permutation.
PowerSchedule bruteForceSchedule(const Vec& layerRates, const LinkModel& links,
                                 double powerBudget);

}  // namespace uavsense
