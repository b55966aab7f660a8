#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "uavsense/rate_alloc.hpp"
#include "uavsense/rng.hpp"

#include <cmath>

using namespace uavsense;

namespace {

Vec vec(std::initializer_list<double> values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

// Scenario with one session spanning all UAVs; per-UAV weights come out of
// the quadrature, so tests that need exact alphas construct weights directly.
ScenarioSpec chainScenario(std::initializer_list<double> betas, double capacity,
                           double bound = 1.0) {
  ScenarioSpec s;
  s.capacity = capacity;
  int id = 1;
  double pos = 0.0;
  const int n = static_cast<int>(betas.size());
  for (double b : betas) {
    s.viewpoints.push_back({id++, pos, b});
    pos += 1.0 / std::max(1, n - 1);
  }
  if (s.viewpoints.size() == 1) s.viewpoints[0].position = 0.5;
  SessionSpec sess;
  sess.id = 1;
  for (int i = 1; i < id; ++i) sess.members.push_back(i);
  sess.priority = 1.0;
  sess.maxDistortion = bound;
  sess.popularityMean = 0.5;
  sess.popularityStd = 0.3;
  s.sessions = {sess};
  return s;
}

AggregatedWeights directWeights(const ScenarioSpec& s, const Mat& perSession) {
  AggregatedWeights w;
  w.alphaPerSession = perSession;
  w.synthesisConstant = Vec::Zero(perSession.rows());
  w.alpha = Vec::Zero(perSession.cols());
  for (int k = 0; k < perSession.rows(); ++k)
    w.alpha += s.sessions[k].priority * perSession.row(k).transpose();
  return w;
}

struct RandomInstance {
  ScenarioSpec scenario;
  AggregatedWeights weights;
};

RandomInstance randomInstance(std::uint64_t seed, int maxUavs = 3) {
  Rng rng(seed);
  const int n = 2 + static_cast<int>(rng.nextBelow(maxUavs - 1));
  const int k = 1 + static_cast<int>(rng.nextBelow(2));
  ScenarioSpec s;
  s.capacity = 2.0 + 3.0 * rng.nextDouble();
  double pos = 0.02;
  for (int i = 0; i < n; ++i) {
    s.viewpoints.push_back({i + 1, pos, 0.4 + 2.1 * rng.nextDouble()});
    pos += 0.9 / n;
  }
  Mat perSession = Mat::Zero(k, n);
  for (int j = 0; j < k; ++j) {
    SessionSpec sess;
    sess.id = j + 1;
    const int first = static_cast<int>(rng.nextBelow(n));
    const int len = 1 + static_cast<int>(rng.nextBelow(n - first));
    double sum = 0.0;
    for (int m = first; m < first + len; ++m) {
      sess.members.push_back(m + 1);
      perSession(j, m) = 0.2 + rng.nextDouble();
      sum += perSession(j, m);
    }
    perSession.row(j) /= sum;
    sess.priority = 0.5 + 1.5 * rng.nextDouble();
    sess.maxDistortion = 1.0;
    sess.popularityMean = 0.5;
    sess.popularityStd = 0.25;
    s.sessions.push_back(std::move(sess));
  }
  RandomInstance inst{std::move(s), {}};
  inst.weights = directWeights(inst.scenario, perSession);

  // Make one session binding but feasible: pick the bound between the
  // best-achievable distortion (probe) and the unconstrained optimum.
  Rng pick(seed * 977 + 5);
  const int target = static_cast<int>(pick.nextBelow(k));
  Vec beta(n);
  for (int i = 0; i < n; ++i) beta[i] = inst.scenario.viewpoints[i].beta;
  const WaterfillResult freeSol =
      waterfill(inst.weights.alpha, beta, inst.scenario.capacity);
  const double freeDk =
      inst.weights.alphaPerSession.row(target).dot(
          (-beta.array() * freeSol.rates.array()).exp().matrix());
  const WaterfillResult probe = waterfill(
      inst.weights.alphaPerSession.row(target).transpose(), beta,
      inst.scenario.capacity);
  const double minDk =
      inst.weights.alphaPerSession.row(target).dot(
          (-beta.array() * probe.rates.array()).exp().matrix());
  const double frac = 0.45 + 0.45 * pick.nextDouble();
  inst.scenario.sessions[target].maxDistortion =
      std::min(1.0, minDk + frac * (freeDk - minDk));
  return inst;
}

}  // namespace

TEST_CASE("waterfill symmetric and single cases") {
  const WaterfillResult sym = waterfill(vec({1, 1}), vec({1, 1}), 4.0);
  CHECK(sym.rates[0] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(sym.rates[1] == doctest::Approx(2.0).epsilon(1e-10));

  const WaterfillResult single = waterfill(vec({1}), vec({0.7}), 5.0);
  CHECK(single.rates[0] == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("waterfill closed-form fixture") {
  const WaterfillResult r = waterfill(vec({2, 1}), vec({1, 1}), 2.0);
  CHECK(std::abs(r.rates[0] - (1.0 + std::log(2.0) / 2.0)) < 1e-8);
  CHECK(std::abs(r.rates[1] - (1.0 - std::log(2.0) / 2.0)) < 1e-8);
  // Equal marginals at the optimum.
  const double m0 = 2.0 * std::exp(-r.rates[0]);
  const double m1 = 1.0 * std::exp(-r.rates[1]);
  CHECK(std::abs(m0 - m1) < 1e-8);
  CHECK(std::abs(m0 - r.mu) < 1e-8);
}

TEST_CASE("waterfill zero-weight entries and degenerate input") {
  const WaterfillResult r = waterfill(vec({1, 0, 2}), vec({1, 1, 1}), 3.0);
  CHECK(r.rates[1] == 0.0);
  CHECK(r.rates.sum() == doctest::Approx(3.0).epsilon(1e-10));
  CHECK_THROWS_WITH(waterfill(vec({0, 0}), vec({1, 1}), 1.0),
                    "degenerate objective");
}

TEST_CASE("waterfill properties on random inputs") {
  Rng rng(91);
  for (int t = 0; t < 60; ++t) {
    const int n = 1 + static_cast<int>(rng.nextBelow(5));
    Vec alpha(n), beta(n);
    for (int i = 0; i < n; ++i) {
      alpha[i] = rng.nextBelow(5) == 0 ? 0.0 : 0.1 + 2.0 * rng.nextDouble();
      beta[i] = 0.3 + 2.0 * rng.nextDouble();
    }
    if (alpha.maxCoeff() == 0.0) alpha[0] = 1.0;
    const double capacity = 0.5 + 5.0 * rng.nextDouble();
    const WaterfillResult r = waterfill(alpha, beta, capacity);
    CHECK(r.rates.minCoeff() >= 0.0);
    // Capacity binds.
    CHECK(std::abs(r.rates.sum() - capacity) < 1e-8 * std::max(1.0, capacity));
    // Equal marginals / KKT sign conditions.
    for (int i = 0; i < n; ++i) {
      const double marginal = alpha[i] * beta[i] * std::exp(-beta[i] * r.rates[i]);
      if (r.rates[i] > 0.0)
        CHECK(std::abs(marginal - r.mu) < 1e-8 * std::max(1.0, r.mu));
      else
        CHECK(alpha[i] * beta[i] <= r.mu + 1e-8);
    }
  }
}

TEST_CASE("solveAllocation reduces to waterfill without binding bounds") {
  const ScenarioSpec s = chainScenario({1.0, 1.6, 0.7}, 5.0);
  const AggregatedWeights w = aggregateWeights(s);
  const AllocationResult full = solveAllocation(s, w);
  Vec beta(3);
  for (int i = 0; i < 3; ++i) beta[i] = s.viewpoints[i].beta;
  const WaterfillResult wf = waterfill(w.alpha, beta, s.capacity);
  for (int i = 0; i < 3; ++i)
    CHECK(std::abs(full.rates.rates[i] - wf.rates[i]) < 1e-8);
  CHECK(full.kktResidual < 1e-6);
  CHECK(full.sessionMultipliers.maxCoeff() == 0.0);
}

TEST_CASE("symmetric disjoint sessions split the capacity evenly") {
  ScenarioSpec s;
  s.capacity = 6.0;
  s.viewpoints = {{1, 0.2, 1.0}, {2, 0.8, 1.0}};
  for (int k = 0; k < 2; ++k) {
    SessionSpec sess;
    sess.id = k + 1;
    sess.members = {k + 1};
    sess.priority = 1.0;
    sess.maxDistortion = 1.0;
    sess.popularityMean = k == 0 ? 0.2 : 0.8;
    sess.popularityStd = 0.1;
    s.sessions.push_back(std::move(sess));
  }
  const AggregatedWeights w = aggregateWeights(s);
  const AllocationResult r = solveAllocation(s, w);
  CHECK(r.rates.rates[0] == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(r.rates.rates[1] == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("binding session bound matches the grid oracle") {
  // Three UAVs, one tight bound on the first two.
  ScenarioSpec s = chainScenario({1.0, 1.4, 0.8}, 3.0);
  Mat perSession(2, 3);
  perSession << 0.6, 0.4, 0.0, 0.0, 0.0, 1.0;
  SessionSpec second = s.sessions[0];
  second.id = 2;
  second.members = {3};
  s.sessions.push_back(second);
  s.sessions[0].members = {1, 2};
  const AggregatedWeights w = directWeights(s, perSession);

  // Tighten session 1 below its unconstrained level.
  const AllocationResult loose = solveAllocation(s, w);
  const double looseD1 = loose.sessionDistortions[0];
  s.sessions[0].maxDistortion = 0.8 * looseD1;

  const AllocationResult tight = solveAllocation(s, w);
  CHECK(tight.sessionDistortions[0] <= s.sessions[0].maxDistortion + 1e-6);
  CHECK(tight.kktResidual < 1e-6);
  CHECK(tight.sessionMultipliers[0] > 0.0);

  const AllocationResult oracle = bruteForceAllocation(s, w, 0.01);
  for (int i = 0; i < 3; ++i)
    CHECK(std::abs(tight.rates.rates[i] - oracle.rates.rates[i]) <= 0.015);
  CHECK(std::abs(tight.objective - oracle.objective) <= 1e-4);
  // The solver never loses to a feasible grid point.
  CHECK(tight.objective <= oracle.objective + 1e-9);
}

TEST_CASE("infeasible bound raises with the session id") {
  ScenarioSpec s = chainScenario({1.0, 1.0}, 0.5, 0.05);
  const AggregatedWeights w = aggregateWeights(s);
  CHECK_THROWS_AS(solveAllocation(s, w), InfeasibleError);
  try {
    solveAllocation(s, w);
  } catch (const InfeasibleError& e) {
    CHECK(std::string(e.what()).find("infeasible session constraint 1") !=
          std::string::npos);
  }
}

TEST_CASE("brute force guards and trivial fixtures") {
  ScenarioSpec s = chainScenario({1.0}, 2.0);
  const AggregatedWeights w = aggregateWeights(s);
  const AllocationResult r = bruteForceAllocation(s, w, 0.5);
  CHECK(r.rates.rates[0] == doctest::Approx(2.0));

  ScenarioSpec sym = chainScenario({1.0, 1.0}, 4.0);
  Mat perSession(1, 2);
  perSession << 0.5, 0.5;
  const AggregatedWeights ws = directWeights(sym, perSession);
  const AllocationResult rs = bruteForceAllocation(sym, ws, 0.5);
  CHECK(rs.rates.rates[0] == doctest::Approx(2.0));
  CHECK(rs.rates.rates[1] == doctest::Approx(2.0));

  ScenarioSpec big = chainScenario({1, 1, 1, 1, 1}, 2.0);
  const AggregatedWeights wb = aggregateWeights(big);
  CHECK_THROWS_WITH(bruteForceAllocation(big, wb, 0.5),
                    "oracle limited to desk scale");
  CHECK_THROWS_AS(bruteForceAllocation(sym, ws, 0.0), ConfigError);
}

TEST_CASE("oracle dominance and complementary slackness on random instances") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const RandomInstance inst = randomInstance(seed);
    AllocationResult solved;
    try {
      solved = solveAllocation(inst.scenario, inst.weights);
    } catch (const InfeasibleError&) {
      continue;  // probe rejected the drawn bound
    }
    CHECK(solved.kktResidual < 1e-6);
    for (int k = 0; k < inst.scenario.sessionCount(); ++k) {
      CHECK(solved.sessionDistortions[k] <=
            inst.scenario.sessions[k].maxDistortion + 1e-6);
      const double slack = solved.sessionMultipliers[k] *
                           (solved.sessionDistortions[k] -
                            inst.scenario.sessions[k].maxDistortion);
      CHECK(std::abs(slack) < 1e-6);
    }
    const AllocationResult oracle =
        bruteForceAllocation(inst.scenario, inst.weights,
                             0.01 * inst.scenario.capacity);
    CHECK(solved.objective <= oracle.objective + 1e-9);
  }
}

TEST_CASE("raising a session priority never raises its distortion") {
  for (std::uint64_t seed = 40; seed <= 52; ++seed) {
    RandomInstance inst = randomInstance(seed);
    inst.scenario.sessions[0].maxDistortion = 1.0;
    if (inst.scenario.sessionCount() > 1)
      inst.scenario.sessions[1].maxDistortion = 1.0;
    const AllocationResult before = solveAllocation(inst.scenario, inst.weights);
    const double dBefore = before.sessionDistortions[0];

    AggregatedWeights boosted = inst.weights;
    ScenarioSpec boostedScenario = inst.scenario;
    boostedScenario.sessions[0].priority *= 2.0;
    boosted.alpha = Vec::Zero(inst.scenario.uavCount());
    for (int k = 0; k < inst.scenario.sessionCount(); ++k)
      boosted.alpha += boostedScenario.sessions[k].priority *
                       boosted.alphaPerSession.row(k).transpose();
    const AllocationResult after = solveAllocation(boostedScenario, boosted);
    CHECK(after.sessionDistortions[0] <= dBefore + 1e-9);
  }
}
