#include "uavsense/rate_alloc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace uavsense {

namespace {

Vec ratesAt(const Vec& weights, const Vec& beta, double mu) {
  Vec r = Vec::Zero(weights.size());
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    const double top = weights[i] * beta[i];
    if (top > mu) r[i] = std::log(top / mu) / beta[i];
  }
  return r;
}

}  // namespace

WaterfillResult waterfill(const Vec& alpha, const Vec& beta, double capacity) {
  if (alpha.size() != beta.size())
    throw ConfigError("waterfill: alpha/beta size mismatch");
  if (!(capacity > 0.0)) throw ConfigError("waterfill: capacity must be > 0");
  double top = 0.0;
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    if (alpha[i] < 0.0) throw ConfigError("waterfill: negative weight");
    if (!(beta[i] > 0.0)) throw ConfigError("waterfill: beta must be > 0");
    top = std::max(top, alpha[i] * beta[i]);
  }
  if (top == 0.0) throw std::runtime_error("degenerate objective");

  // Bracket mu: at mu = top all rates are zero; shrink until demand >= C.
  double hi = top;
  double lo = top;
  for (int guard = 0; guard < 4096 && ratesAt(alpha, beta, lo).sum() < capacity;
       ++guard)
    lo *= 0.5;
  for (int it = 0; it < 128; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (ratesAt(alpha, beta, mid).sum() >= capacity)
      lo = mid;
    else
      hi = mid;
  }
  double mu = lo;

  // Exact mu on the active set the bisection resolved.
  double sumLog = 0.0;
  double sumInv = 0.0;
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    if (alpha[i] > 0.0 && alpha[i] * beta[i] > mu) {
      sumLog += std::log(alpha[i] * beta[i]) / beta[i];
      sumInv += 1.0 / beta[i];
    }
  }
  if (sumInv > 0.0) {
    const double refined = std::exp((sumLog - capacity) / sumInv);
    const Vec r = ratesAt(alpha, beta, refined);
    if (std::abs(r.sum() - capacity) <= 1e-9 * std::max(1.0, capacity))
      mu = refined;
  }
  return {ratesAt(alpha, beta, mu), mu};
}

namespace {

struct Problem {
  const ScenarioSpec& scenario;
  const AggregatedWeights& weights;
  Vec beta;

  explicit Problem(const ScenarioSpec& s, const AggregatedWeights& w)
      : scenario(s), weights(w), beta(s.uavCount()) {
    for (int i = 0; i < s.uavCount(); ++i) beta[i] = s.viewpoints[i].beta;
  }

  Vec expTerms(const Vec& rates) const {
    return (-beta.array() * rates.array()).exp();
  }

  // g_k = D_k - D_k^0
  Vec constraintGaps(const Vec& expos) const {
    Vec g(scenario.sessionCount());
    for (int k = 0; k < scenario.sessionCount(); ++k)
      g[k] = weights.alphaPerSession.row(k).dot(expos) +
             weights.synthesisConstant[k] - scenario.sessions[k].maxDistortion;
    return g;
  }

  Vec dualWeights(const Vec& nu) const {
    return weights.alpha + weights.alphaPerSession.transpose() * nu;
  }
};

double kktResidualOf(const Problem& prob, const Vec& rates, double mu,
                     const Vec& nu, const Vec& gaps) {
  const Vec w = prob.dualWeights(nu);
  const Vec expos = prob.expTerms(rates);
  double res = 0.0;
  for (Eigen::Index i = 0; i < rates.size(); ++i) {
    const double marginal = prob.beta[i] * w[i] * expos[i];
    if (rates[i] > 0.0)
      res = std::max(res, std::abs(marginal - mu) / std::max(1.0, mu));
    else
      res = std::max(res, std::max(0.0, marginal - mu) / std::max(1.0, mu));
  }
  const double cap = prob.scenario.capacity;
  res = std::max(res, std::abs(rates.sum() - cap) / std::max(1.0, cap));
  for (Eigen::Index k = 0; k < nu.size(); ++k) {
    res = std::max(res, std::max(0.0, gaps[k]));
    res = std::max(res, std::abs(nu[k] * gaps[k]));
  }
  return res;
}

}  // namespace

AllocationResult solveAllocation(const ScenarioSpec& scenario,
                                 const AggregatedWeights& weights,
                                 const AllocationConfig& config) {
  validateScenario(scenario);
  const Problem prob(scenario, weights);
  const int nSessions = scenario.sessionCount();
  const double cap = scenario.capacity;

  // Feasibility probe: best achievable D_k with the entire capacity devoted
  // to session k. A failure here is a certificate, not a non-converging loop.
  for (int k = 0; k < nSessions; ++k) {
    const Vec ak = weights.alphaPerSession.row(k).transpose();
    double best = weights.synthesisConstant[k];
    if (ak.maxCoeff() > 0.0) {
      const WaterfillResult wf = waterfill(ak, prob.beta, cap);
      best += ak.dot(prob.expTerms(wf.rates));
    }
    if (best > scenario.sessions[k].maxDistortion + 1e-9)
      throw InfeasibleError("infeasible session constraint " +
                            std::to_string(scenario.sessions[k].id));
  }

  Vec nu = Vec::Zero(nSessions);
  Vec rates;
  double mu = 0.0;
  Vec gaps = Vec::Zero(nSessions);

  auto evaluate = [&](const Vec& nuNow, Vec& ratesOut, double& muOut) -> Vec {
    const WaterfillResult wf = waterfill(prob.dualWeights(nuNow), prob.beta, cap);
    ratesOut = wf.rates;
    muOut = wf.mu;
    return prob.constraintGaps(prob.expTerms(ratesOut));
  };

  // Active-set refinement: Newton on the binding-session gap equations with
  // the water-filling inner solution embedded. Returns true when the full
  // KKT system is satisfied at tolerance.
  auto polish = [&]() -> bool {
    std::vector<int> active;
    for (int k = 0; k < nSessions; ++k)
      if (nu[k] > 1e-12 || gaps[k] > -10.0 * config.constraintTol)
        active.push_back(k);
    for (int pass = 0; pass < 8; ++pass) {
      if (active.empty()) {
        nu.setZero();
        gaps = evaluate(nu, rates, mu);
        break;
      }
      Vec nuTry = nu;
      bool converged = false;
      for (int it = 0; it < 40; ++it) {
        Vec r;
        double m;
        const Vec g = evaluate(nuTry, r, m);
        double worst = 0.0;
        for (int k : active) worst = std::max(worst, std::abs(g[k]));
        if (worst < 0.25 * config.constraintTol) {
          converged = true;
          break;
        }
        const int na = static_cast<int>(active.size());
        Mat jac(na, na);
        for (int col = 0; col < na; ++col) {
          Vec nuStep = nuTry;
          const double h = std::max(1e-7, 1e-7 * nuTry[active[col]]);
          nuStep[active[col]] += h;
          Vec r2;
          double m2;
          const Vec g2 = evaluate(nuStep, r2, m2);
          for (int row = 0; row < na; ++row)
            jac(row, col) = (g2[active[row]] - g[active[row]]) / h;
        }
        Vec rhs(na);
        for (int row = 0; row < na; ++row) rhs[row] = -g[active[row]];
        const Vec delta = jac.fullPivLu().solve(rhs);
        if (!delta.allFinite()) break;
        double scale = 1.0;
        bool improved = false;
        for (int ls = 0; ls < 12; ++ls, scale *= 0.5) {
          Vec nuNext = nuTry;
          for (int j = 0; j < na; ++j)
            nuNext[active[j]] = std::max(0.0, nuTry[active[j]] + scale * delta[j]);
          Vec r3;
          double m3;
          const Vec g3 = evaluate(nuNext, r3, m3);
          double worst3 = 0.0;
          for (int k : active) worst3 = std::max(worst3, std::abs(g3[k]));
          if (worst3 < worst) {
            nuTry = nuNext;
            improved = true;
            break;
          }
        }
        if (!improved) break;
      }
      if (!converged) return false;

      nu = nuTry;
      gaps = evaluate(nu, rates, mu);
      // Constraints pinned at nu = 0 with slack leave the active set;
      // violated inactive ones join it.
      std::vector<int> next;
      bool changed = false;
      for (int k : active) {
        if (nu[k] <= 1e-12 && gaps[k] < -0.25 * config.constraintTol) {
          nu[k] = 0.0;
          changed = true;
        } else {
          next.push_back(k);
        }
      }
      for (int k = 0; k < nSessions; ++k) {
        if (std::find(next.begin(), next.end(), k) == next.end() &&
            gaps[k] > 0.25 * config.constraintTol) {
          next.push_back(k);
          changed = true;
        }
      }
      std::sort(next.begin(), next.end());
      active = next;
      if (!changed)
        return kktResidualOf(prob, rates, mu, nu, gaps) < config.constraintTol;
    }
    return kktResidualOf(prob, rates, mu, nu, gaps) < config.constraintTol;
  };

  int iterations = 0;
  bool solved = false;
  for (int t = 1; t <= config.maxIter; ++t) {
    iterations = t;
    gaps = evaluate(nu, rates, mu);
    const double violation = std::max(0.0, gaps.maxCoeff());
    const double primal = weights.alpha.dot(prob.expTerms(rates));
    const double gap = std::abs(nu.dot(gaps)) / std::max(1.0, std::abs(primal));
    if (violation < config.constraintTol && gap < config.dualGapTol &&
        kktResidualOf(prob, rates, mu, nu, gaps) < config.constraintTol) {
      solved = true;
      break;
    }
    if (t % 20 == 0 || t == config.maxIter) {
      if (polish()) {
        solved = true;
        break;
      }
    }
    for (int k = 0; k < nSessions; ++k)
      nu[k] = std::max(0.0, nu[k] + (config.stepScale / t) * gaps[k]);
  }
  if (!solved)
    throw std::runtime_error("allocation did not converge within iteration budget");

  AllocationResult result;
  result.rates.rates = rates;
  result.objective = weights.alpha.dot(prob.expTerms(rates));
  result.sessionDistortions = gaps;
  for (int k = 0; k < nSessions; ++k)
    result.sessionDistortions[k] += scenario.sessions[k].maxDistortion;
  result.capacityMultiplier = mu;
  result.sessionMultipliers = nu;
  result.kktResidual = kktResidualOf(prob, rates, mu, nu, gaps);
  result.iterations = iterations;
  return result;
}

AllocationResult bruteForceAllocation(const ScenarioSpec& scenario,
                                      const AggregatedWeights& weights,
                                      double gridStep) {
  validateScenario(scenario);
  const int n = scenario.uavCount();
  if (n > 4) throw std::runtime_error("oracle limited to desk scale");
  if (!(gridStep > 0.0)) throw ConfigError("gridStep must be positive");
  const Problem prob(scenario, weights);
  const double cap = scenario.capacity;
  const int maxSteps = static_cast<int>(cap / gridStep + 1e-9);
  const double sumTol = cap * (1.0 + 1e-12) + 1e-12;

  // exp(-beta_i * g * step) per coordinate and grid level.
  std::vector<std::vector<double>> expTable(n);
  for (int i = 0; i < n; ++i) {
    expTable[i].resize(maxSteps + 1);
    for (int g = 0; g <= maxSteps; ++g)
      expTable[i][g] = std::exp(-prob.beta[i] * g * gridStep);
  }

  const int nSessions = scenario.sessionCount();
  std::vector<int> levels(n, 0);
  std::vector<int> best;
  double bestObj = std::numeric_limits<double>::infinity();

  // Lexicographic enumeration; the first strict minimum therefore realizes
  // the lexicographically-smallest tie-break.
  std::vector<double> expos(n);
  auto visit = [&](auto&& self, int depth, double used) -> void {
    if (depth == n) {
      for (int i = 0; i < n; ++i) expos[i] = expTable[i][levels[i]];
      for (int k = 0; k < nSessions; ++k) {
        double dk = weights.synthesisConstant[k];
        for (int i = 0; i < n; ++i)
          dk += weights.alphaPerSession(k, i) * expos[i];
        if (dk > scenario.sessions[k].maxDistortion + 1e-9) return;
      }
      double obj = 0.0;
      for (int i = 0; i < n; ++i) obj += weights.alpha[i] * expos[i];
      if (obj < bestObj) {
        bestObj = obj;
        best = levels;
      }
      return;
    }
    for (int g = 0; g <= maxSteps; ++g) {
      const double next = used + g * gridStep;
      if (next > sumTol) break;
      levels[depth] = g;
      self(self, depth + 1, next);
    }
    levels[depth] = 0;
  };
  visit(visit, 0, 0.0);

  if (best.empty())
    throw InfeasibleError("no feasible grid point for the session bounds");

  AllocationResult result;
  result.rates.rates = Vec(n);
  for (int i = 0; i < n; ++i) result.rates.rates[i] = best[i] * gridStep;
  const Vec expos2 = prob.expTerms(result.rates.rates);
  result.objective = weights.alpha.dot(expos2);
  result.sessionDistortions = Vec(nSessions);
  for (int k = 0; k < nSessions; ++k)
    result.sessionDistortions[k] =
        weights.alphaPerSession.row(k).dot(expos2) +
        weights.synthesisConstant[k];
  result.sessionMultipliers = Vec::Zero(nSessions);
  result.kktResidual = std::numeric_limits<double>::quiet_NaN();
  return result;
}

}  // namespace uavsense
