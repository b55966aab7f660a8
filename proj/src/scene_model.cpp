#include "uavsense/scene_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace uavsense {

int ScenarioSpec::viewpointIndex(int id) const {
  for (std::size_t i = 0; i < viewpoints.size(); ++i)
    if (viewpoints[i].id == id) return static_cast<int>(i);
  throw ConfigError("unknown viewpoint id " + std::to_string(id));
}

void validateScenario(const ScenarioSpec& scenario) {
  if (scenario.viewpoints.empty())
    throw ConfigError("scenario has no viewpoints");
  if (!(scenario.capacity > 0.0))
    throw ConfigError("capacity must be positive");
  if (scenario.dibrPolyDegree < 1)
    throw ConfigError("dibr polynomial degree must be >= 1");
  if (scenario.dibrSynthesisPenalty < 0.0)
    throw ConfigError("dibr synthesis penalty must be non-negative");
  if (scenario.quadratureGridSize < 16)
    throw ConfigError("quadrature grid size must be >= 16");
  std::set<int> ids;
  for (const auto& vp : scenario.viewpoints) {
    if (!(vp.beta > 0.0))
      throw ConfigError("viewpoint " + std::to_string(vp.id) +
                        ": beta must be positive");
    if (vp.position < 0.0 || vp.position > 1.0)
      throw ConfigError("viewpoint " + std::to_string(vp.id) +
                        ": position must lie in [0, 1]");
    if (!ids.insert(vp.id).second)
      throw ConfigError("duplicate viewpoint id " + std::to_string(vp.id));
  }
  std::set<int> sessionIds;
  for (const auto& s : scenario.sessions) {
    if (!sessionIds.insert(s.id).second)
      throw ConfigError("duplicate session id " + std::to_string(s.id));
    if (s.members.empty())
      throw ConfigError("session " + std::to_string(s.id) + " has no members");
    if (!(s.priority >= 0.0))
      throw ConfigError("session " + std::to_string(s.id) +
                        ": priority must be non-negative");
    if (!(s.maxDistortion > 0.0 && s.maxDistortion <= 1.0))
      throw ConfigError("session " + std::to_string(s.id) +
                        ": max_distortion must lie in (0, 1]");
    if (!(s.popularityStd > 0.0))
      throw ConfigError("session " + std::to_string(s.id) +
                        ": popularity stddev must be positive");
    double prev = -1.0;
    for (int id : s.members) {
      const auto& vp = scenario.viewpoints[scenario.viewpointIndex(id)];
      if (vp.position <= prev)
        throw ConfigError("session " + std::to_string(s.id) +
                          ": member positions must be strictly increasing");
      prev = vp.position;
    }
  }
}

double evalDistortion(const DistortionModel& model, double rate) {
  if (!(model.beta > 0.0))
    throw std::domain_error("distortion model requires beta > 0");
  if (rate < 0.0)
    throw std::domain_error("sampling rate must be non-negative");
  return std::exp(-model.beta * rate);
}

double virtualViewDistortion(double x, double dLeft, double dRight, int p,
                             double d0) {
  if (!(x >= 0.0 && x <= 1.0))
    throw std::domain_error("virtual view position must lie in [0, 1]");
  if (p < 1) throw std::domain_error("polynomial degree must be >= 1");
  if (d0 < 0.0) throw std::domain_error("synthesis penalty must be >= 0");
  const double value = std::pow(1.0 - x, p) * dLeft + std::pow(x, p) * dRight +
                       d0 * x * (1.0 - x);
  return std::clamp(value, 0.0, 1.0);
}

namespace {

struct QuadCell {
  double lo = 0.0;
  double hi = 0.0;
};

// Splits [0,1] at the member positions and distributes `grid` cells across
// the resulting segments by largest remainder, at least one per segment.
std::vector<QuadCell> buildCells(const std::vector<double>& memberPos,
                                 int grid) {
  std::vector<double> cuts{0.0};
  for (double p : memberPos)
    if (p > cuts.back() + 1e-12 && p < 1.0 - 1e-12) cuts.push_back(p);
  cuts.push_back(1.0);

  const int nSeg = static_cast<int>(cuts.size()) - 1;
  std::vector<int> cells(nSeg, 1);
  int assigned = nSeg;
  std::vector<std::pair<double, int>> remainders;
  for (int s = 0; s < nSeg; ++s) {
    const double want = (cuts[s + 1] - cuts[s]) * grid;
    const int extra = std::max(0, static_cast<int>(want) - 1);
    cells[s] += extra;
    assigned += extra;
    remainders.emplace_back(want - std::floor(want), s);
  }
  std::sort(remainders.begin(), remainders.end(),
            [](const auto& a, const auto& b) {
              if (a.first != b.first) return a.first > b.first;
              return a.second < b.second;
            });
  for (int i = 0; assigned < grid; ++i) {
    cells[remainders[static_cast<std::size_t>(i) % remainders.size()].second]++;
    ++assigned;
  }

  std::vector<QuadCell> out;
  out.reserve(static_cast<std::size_t>(std::max(grid, nSeg)));
  for (int s = 0; s < nSeg; ++s) {
    const double h = (cuts[s + 1] - cuts[s]) / cells[s];
    for (int c = 0; c < cells[s]; ++c)
      out.push_back({cuts[s] + c * h, cuts[s] + (c + 1) * h});
  }
  return out;
}

}  // namespace

AggregatedWeights aggregateWeightsWithGrid(const ScenarioSpec& scenario,
                                           int gridSize) {
  validateScenario(scenario);
  const int n = scenario.uavCount();
  const int k = scenario.sessionCount();
  AggregatedWeights w;
  w.alpha = Vec::Zero(n);
  w.alphaPerSession = Mat::Zero(k, n);
  w.synthesisConstant = Vec::Zero(k);

  // Two-point Gauss-Legendre abscissae on [-1, 1].
  const double node = 1.0 / std::sqrt(3.0);
  const int p = scenario.dibrPolyDegree;
  const double d0 = scenario.dibrSynthesisPenalty;

  for (int s = 0; s < k; ++s) {
    const SessionSpec& sess = scenario.sessions[s];
    const int m = static_cast<int>(sess.members.size());
    std::vector<int> idx(m);
    std::vector<double> pos(m);
    for (int j = 0; j < m; ++j) {
      idx[j] = scenario.viewpointIndex(sess.members[j]);
      pos[j] = scenario.viewpoints[idx[j]].position;
    }

    const auto cells = buildCells(pos, gridSize);
    Vec num = Vec::Zero(n);
    double d0num = 0.0;
    double den = 0.0;
    for (const auto& cell : cells) {
      const double mid = 0.5 * (cell.lo + cell.hi);
      const double half = 0.5 * (cell.hi - cell.lo);
      for (const double v : {mid - half * node, mid + half * node}) {
        const double z = (v - sess.popularityMean) / sess.popularityStd;
        const double pop = half * std::exp(-0.5 * z * z);
        den += pop;
        if (m == 1 || v <= pos.front()) {
          num[idx[0]] += pop;
          continue;
        }
        if (v >= pos.back()) {
          num[idx[m - 1]] += pop;
          continue;
        }
        const int right = static_cast<int>(
            std::upper_bound(pos.begin(), pos.end(), v) - pos.begin());
        const int left = right - 1;
        const double x = (v - pos[left]) / (pos[right] - pos[left]);
        num[idx[left]] += pop * std::pow(1.0 - x, p);
        num[idx[right]] += pop * std::pow(x, p);
        d0num += pop * x * (1.0 - x);
      }
    }
    w.alphaPerSession.row(s) = (num / den).transpose();
    w.synthesisConstant[s] = d0 * d0num / den;
    w.alpha += sess.priority * num / den;
  }
  return w;
}

AggregatedWeights aggregateWeights(const ScenarioSpec& scenario) {
  return aggregateWeightsWithGrid(scenario, scenario.quadratureGridSize);
}

double sessionDistortion(const ScenarioSpec& scenario,
                         const AggregatedWeights& weights,
                         const SamplingRateVector& rates, int sessionIndex) {
  if (sessionIndex < 0 || sessionIndex >= scenario.sessionCount())
    throw ConfigError("session index out of range");
  if (rates.rates.size() != scenario.uavCount())
    throw ConfigError("rate vector length must equal viewpoint count");
  double d = weights.synthesisConstant[sessionIndex];
  for (int i = 0; i < scenario.uavCount(); ++i) {
    const double a = weights.alphaPerSession(sessionIndex, i);
    if (a == 0.0) continue;
    d += a * evalDistortion({scenario.viewpoints[i].beta}, rates.rates[i]);
  }
  return d;
}

double swarmObjective(const ScenarioSpec& scenario,
                      const AggregatedWeights& weights,
                      const SamplingRateVector& rates) {
  double obj = 0.0;
  for (int i = 0; i < scenario.uavCount(); ++i) {
    if (weights.alpha[i] == 0.0) continue;
    obj += weights.alpha[i] *
           evalDistortion({scenario.viewpoints[i].beta}, rates.rates[i]);
  }
  return obj;
}

}  // namespace uavsense
