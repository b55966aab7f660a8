#include "uavsense/beam_power.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace uavsense {

namespace {

void validateBeam(const Beam& b) {
  if (!(b.gain > 0.0 && b.bandwidth > 0.0 && b.noiseDensity > 0.0))
    throw ConfigError("beam parameters must be positive");
}

PowerSchedule scheduleFromAssignment(const Vec& layerRates,
                                     const LinkModel& links,
                                     const std::vector<int>& assignment,
                                     double powerBudget) {
  PowerSchedule out;
  out.assignment = assignment;
  out.powers = Vec(layerRates.size());
  for (Eigen::Index l = 0; l < layerRates.size(); ++l)
    out.powers[l] = rateToPower(layerRates[l], links.beams[assignment[l]]);
  out.totalPower = out.powers.sum();
  out.feasible = out.totalPower <= powerBudget;
  return out;
}

}  // namespace

double linkRate(double power, const Beam& beam) {
  validateBeam(beam);
  if (power < 0.0) throw ConfigError("power must be non-negative");
  return beam.bandwidth *
         std::log2(1.0 + beam.gain * power /
                             (beam.noiseDensity * beam.bandwidth));
}

double rateToPower(double rate, const Beam& beam) {
  validateBeam(beam);
  if (rate < 0.0) throw ConfigError("rate must be non-negative");
  if (rate == 0.0) return 0.0;
  return beam.noiseDensity * beam.bandwidth / beam.gain *
         (std::exp2(rate / beam.bandwidth) - 1.0);
}

PowerSchedule schedule(const Vec& layerRates, const LinkModel& links,
                       double powerBudget) {
  const int n = static_cast<int>(layerRates.size());
  if (n != links.beamCount())
    throw ConfigError("beam count must equal layer count");
  for (Eigen::Index l = 0; l < layerRates.size(); ++l)
    if (layerRates[l] < 0.0)
      throw ConfigError("layer rates must be non-negative");

  double refRate = layerRates.maxCoeff();
  if (refRate <= 0.0) refRate = 1.0;

  std::vector<int> layerOrder(n);
  std::iota(layerOrder.begin(), layerOrder.end(), 0);
  std::stable_sort(layerOrder.begin(), layerOrder.end(), [&](int a, int b) {
    return layerRates[a] > layerRates[b];
  });
  std::vector<int> beamOrder(n);
  std::iota(beamOrder.begin(), beamOrder.end(), 0);
  std::vector<double> refCost(n);
  for (int b = 0; b < n; ++b) refCost[b] = rateToPower(refRate, links.beams[b]);
  std::stable_sort(beamOrder.begin(), beamOrder.end(),
                   [&](int a, int b) { return refCost[a] < refCost[b]; });

  std::vector<int> assignment(n);
  for (int rank = 0; rank < n; ++rank)
    assignment[layerOrder[rank]] = beamOrder[rank];
  return scheduleFromAssignment(layerRates, links, assignment, powerBudget);
}

PowerSchedule bruteForceSchedule(const Vec& layerRates, const LinkModel& links,
                                 double powerBudget) {
  const int n = static_cast<int>(layerRates.size());
  if (n != links.beamCount())
    throw ConfigError("beam count must equal layer count");
  if (n > 8) throw std::runtime_error("oracle limited to 8 beams");

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best;
  double bestTotal = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (int l = 0; l < n; ++l)
      total += rateToPower(layerRates[l], links.beams[perm[l]]);
    if (total < bestTotal) {
      bestTotal = total;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return scheduleFromAssignment(layerRates, links, best, powerBudget);
}

}  // namespace uavsense
