#include "uavsense/sim_harness.hpp"

#include "uavsense/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <sstream>

namespace uavsense {

namespace {

LinkModel makeBeamBank(int beams, const BeamBankParams& params) {
  LinkModel links;
  links.beams.reserve(beams);
  double gain = params.gainTop;
  for (int b = 0; b < beams; ++b) {
    links.beams.push_back({gain, params.bandwidth, params.noiseDensity});
    gain *= params.gainDecay;
  }
  return links;
}

// Redundancy share of R_i: at least `sourceMargin`, grown at small symbol
// budgets so the decoder keeps a few symbols of slack per window.
double effectiveMargin(const PipelineConfig& config, int sentCount) {
  const double bySymbols =
      sentCount > 0 ? 10.0 / static_cast<double>(sentCount) : 0.0;
  return std::min(0.3, std::max(config.sourceMargin, bySymbols));
}

std::string fmtDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

LatencyPair latencyEstimate(const LayeredDesign& design,
                            const PowerSchedule& power, const LinkModel& links,
                            const SymbolGrid& grid, int sentCount) {
  LatencyPair out;
  const int layers = design.allocation.layers();
  if (layers != links.beamCount() ||
      layers != static_cast<int>(power.assignment.size()))
    throw ConfigError("latency estimate requires one beam per layer");

  double totalBytes = 0.0;
  for (int l = 0; l < layers; ++l) {
    const double bytes = design.lambda.lambda[l] * sentCount * grid.symbolSize;
    if (bytes <= 0.0) continue;
    totalBytes += bytes;
    const double rate =
        linkRate(power.powers[l], links.beams[power.assignment[l]]);
    if (rate <= 0.0) {
      out.parallelSeconds = std::numeric_limits<double>::infinity();
      continue;
    }
    out.parallelSeconds =
        std::max(out.parallelSeconds, bytes / (rate * grid.bytesPerRateUnit));
  }

  int bestBeam = 0;
  double bestRate = -1.0;
  for (int b = 0; b < links.beamCount(); ++b) {
    const double r = linkRate(power.totalPower, links.beams[b]);
    if (r > bestRate) {
      bestRate = r;
      bestBeam = b;
    }
  }
  (void)bestBeam;
  out.serialSeconds = bestRate > 0.0
                          ? totalBytes / (bestRate * grid.bytesPerRateUnit)
                          : (totalBytes > 0.0
                                 ? std::numeric_limits<double>::infinity()
                                 : 0.0);
  return out;
}

SwarmDesign designSwarm(const ScenarioSpec& scenario,
                        const AggregatedWeights& weights, double designCapacity,
                        const PipelineConfig& config) {
  ScenarioSpec designScenario = scenario;
  designScenario.capacity = designCapacity;

  const int n = scenario.uavCount();
  const int k = scenario.sessionCount();
  Vec effectiveBounds(k);
  for (int s = 0; s < k; ++s)
    effectiveBounds[s] = scenario.sessions[s].maxDistortion;

  SwarmDesign swarm;
  for (int pass = 0; pass <= config.boundTightenIters; ++pass) {
    for (int s = 0; s < k; ++s)
      designScenario.sessions[s].maxDistortion = effectiveBounds[s];
    swarm.allocation =
        solveAllocation(designScenario, weights, config.allocation);

    swarm.uavs.assign(n, UavDesign{});
    swarm.totalPower = 0.0;
    double latencySum = 0.0;
    int activeCount = 0;
    for (int i = 0; i < n; ++i) {
      UavDesign& uav = swarm.uavs[i];
      uav.rate = swarm.allocation.rates.rates[i];
      uav.sentCount = config.layered.grid.symbolsFor(uav.rate);
      if (uav.sentCount < 1) continue;
      const double margin = effectiveMargin(config, uav.sentCount);
      const double sourceRate = uav.rate * (1.0 - margin);
      const int sourceSymbols = config.layered.grid.symbolsFor(sourceRate);
      if (sourceSymbols < 1) continue;

      LayeredOptConfig cfg = config.layered;
      cfg.layers = std::min(cfg.layers, sourceSymbols);
      cfg.budget = {uav.sentCount, config.designErasureRate};
      uav.design = coordinateDescent({scenario.viewpoints[i].beta}, sourceRate,
                                     cfg);
      uav.links = makeBeamBank(cfg.layers, config.beams);
      uav.power = schedule(uav.design.allocation.layerRates, uav.links,
                           config.beams.powerBudget);
      const LatencyPair lat = latencyEstimate(uav.design, uav.power, uav.links,
                                              cfg.grid, uav.sentCount);
      uav.parallelLatency = lat.parallelSeconds;
      uav.serialLatency = lat.serialSeconds;
      uav.active = true;
      swarm.totalPower += uav.power.totalPower;
      latencySum += uav.parallelLatency;
      ++activeCount;
    }
    swarm.meanParallelLatency = activeCount ? latencySum / activeCount : 0.0;

    // Coding-aware session distortions; tighten the allocator's bounds when
    // the expected decode outcome would breach the application limits.
    bool violated = false;
    for (int s = 0; s < k; ++s) {
      const double bound = scenario.sessions[s].maxDistortion;
      if (bound >= 1.0) continue;
      double dk = weights.synthesisConstant[s];
      for (int i = 0; i < n; ++i) {
        const double a = weights.alphaPerSession(s, i);
        if (a == 0.0) continue;
        dk += a * (swarm.uavs[i].active
                       ? swarm.uavs[i].design.expectedDistortion
                       : 1.0);
      }
      if (dk > bound + 1e-6 && pass < config.boundTightenIters) {
        effectiveBounds[s] =
            std::max(1e-6, effectiveBounds[s] * bound / (dk * 1.02));
        violated = true;
      }
    }
    if (!violated) break;
  }
  return swarm;
}

namespace {

struct TrialAverages {
  double distortion = 0.0;
  Vec sessionDistortions;
  double distortionVar = 0.0;  // sample variance accumulator (unused in rows)
};

// Shared aggregation: realized per-UAV distortions -> priority-weighted
// session view. Returns the normalized objective.
double aggregateRealized(const ScenarioSpec& scenario,
                         const AggregatedWeights& weights,
                         const Vec& realizedPerUav, Vec& sessionOut) {
  const int k = scenario.sessionCount();
  double prioritySum = 0.0;
  double weighted = 0.0;
  for (int s = 0; s < k; ++s) {
    double dk = weights.synthesisConstant[s];
    for (int i = 0; i < scenario.uavCount(); ++i) {
      const double a = weights.alphaPerSession(s, i);
      if (a != 0.0) dk += a * realizedPerUav[i];
    }
    sessionOut[s] += dk;
    const double gamma = scenario.sessions[s].priority;
    weighted += gamma * dk;
    prioritySum += gamma;
  }
  return prioritySum > 0.0 ? weighted / prioritySum : 0.0;
}

}  // namespace

ResultRow simulateOptimal(const ScenarioSpec& scenario,
                          const AggregatedWeights& weights,
                          const SwarmDesign& design,
                          const ChannelConfig& channel,
                          const PipelineConfig& config, std::uint64_t seed) {
  if (!(channel.erasureRate >= 0.0 && channel.erasureRate < 1.0))
    throw ConfigError("erasure rate must lie in [0, 1)");
  const int n = scenario.uavCount();
  const int trials = config.channelTrials;

  double rateSum = 0.0;
  for (const auto& uav : design.uavs) rateSum += uav.rate;

  // Delivery-time symbol budgets: actual capacity split in proportion to the
  // designed rates.
  std::vector<int> sendBudget(n, 0);
  for (int i = 0; i < n; ++i) {
    if (!design.uavs[i].active || rateSum <= 0.0) continue;
    const double share = channel.capacityActual * design.uavs[i].rate / rateSum;
    sendBudget[i] = config.layered.grid.symbolsFor(share);
  }

  std::vector<std::vector<int>> cumCounts(n);
  std::vector<Vec> prefixDistortion(n);
  for (int i = 0; i < n; ++i) {
    if (!design.uavs[i].active) continue;
    const LayerAllocation& alloc = design.uavs[i].design.allocation;
    cumCounts[i] = alloc.cumulativeCounts();
    Vec d(alloc.layers() + 1);
    d[0] = 1.0;
    double cumulative = 0.0;
    for (int l = 0; l < alloc.layers(); ++l) {
      cumulative += alloc.layerRates[l];
      d[l + 1] = evalDistortion({scenario.viewpoints[i].beta}, cumulative);
    }
    prefixDistortion[i] = d;
  }

  Vec realized(n);
  Vec sessionAccum = Vec::Zero(scenario.sessionCount());
  double distortionSum = 0.0;
  for (int t = 0; t < trials; ++t) {
    for (int i = 0; i < n; ++i) {
      if (!design.uavs[i].active || sendBudget[i] < 1) {
        realized[i] = 1.0;
        continue;
      }
      const UavDesign& uav = design.uavs[i];
      const int layers = uav.design.allocation.layers();
      Rng rng(deriveSeed(seed, static_cast<std::uint64_t>(i),
                         static_cast<std::uint64_t>(t)));
      const std::span<const double> probs(uav.design.lambda.lambda.data(),
                                          static_cast<std::size_t>(layers));
      std::vector<int> counts(layers, 0);
      std::vector<int> windows;
      std::vector<std::uint8_t> survived;
      const bool needRows = config.channelEstimator == PrefixEstimator::ExactRank;
      if (needRows) {
        windows.resize(sendBudget[i]);
        survived.resize(sendBudget[i]);
      }
      for (int s = 0; s < sendBudget[i]; ++s) {
        const int w = rng.categorical(probs);
        const bool got = !rng.bernoulli(channel.erasureRate);
        if (got) ++counts[w];
        if (needRows) {
          windows[s] = w;
          survived[s] = got ? 1 : 0;
        }
      }
      int prefix;
      if (needRows) {
        std::vector<std::pair<int, std::vector<std::uint8_t>>> rows;
        for (int s = 0; s < sendBudget[i]; ++s) {
          if (!survived[s]) continue;
          const int kw = cumCounts[i][windows[s]];
          std::vector<std::uint8_t> coeffs(kw);
          for (int j = 0; j < kw; ++j) coeffs[j] = rng.nextByte();
          rows.emplace_back(windows[s] + 1, std::move(coeffs));
        }
        prefix = maxDecodablePrefixByRank(rows, cumCounts[i]);
      } else {
        prefix = maxDecodablePrefixByCounting(counts, cumCounts[i]);
      }
      realized[i] = prefixDistortion[i][prefix];
    }
    distortionSum += aggregateRealized(scenario, weights, realized, sessionAccum);
  }

  ResultRow row;
  row.system = "Optimal";
  row.distortion = distortionSum / trials;
  row.quality = 1.0 / std::max(row.distortion, 1e-6);
  row.sessionDistortions = sessionAccum / trials;
  row.totalPower = design.totalPower;
  row.latencySeconds = design.meanParallelLatency;
  row.seed = seed;
  return row;
}

ResultRow runOptimalPipeline(const ScenarioSpec& scenario,
                             const ChannelConfig& channel,
                             const PipelineConfig& config, std::uint64_t seed) {
  const AggregatedWeights weights = aggregateWeights(scenario);
  const SwarmDesign design =
      designSwarm(scenario, weights, channel.capacityTarget, config);
  return simulateOptimal(scenario, weights, design, channel, config, seed);
}

ResultRow runBaselinePipeline(const ScenarioSpec& scenario,
                              const ChannelConfig& channel,
                              const BaselineConfig& config,
                              const PipelineConfig& pipeline,
                              std::uint64_t seed) {
  if (!(config.fecOverhead >= 0.0 && config.fecOverhead < 1.0))
    throw ConfigError("fec overhead must lie in [0, 1)");
  if (config.blockLength < 1) throw ConfigError("block length must be >= 1");
  const int n = scenario.uavCount();
  const AggregatedWeights weights = aggregateWeights(scenario);
  const int trials = pipeline.channelTrials;

  const double uniformRate = channel.capacityTarget / n;
  const double sourceRate = uniformRate / (1.0 + config.fecOverhead);
  Vec successDistortion(n);
  for (int i = 0; i < n; ++i)
    successDistortion[i] =
        evalDistortion({scenario.viewpoints[i].beta}, sourceRate);

  // Capacity mismatch truncates the block before the channel sees it.
  const double ratio =
      std::min(1.0, channel.capacityActual / channel.capacityTarget);
  const int sent =
      static_cast<int>(std::floor(config.blockLength * ratio + 1e-9));
  const int threshold = static_cast<int>(
      std::ceil(config.blockLength / (1.0 + config.fecOverhead) - 1e-12));

  Vec realized(n);
  Vec sessionAccum = Vec::Zero(scenario.sessionCount());
  double distortionSum = 0.0;
  for (int t = 0; t < trials; ++t) {
    for (int i = 0; i < n; ++i) {
      Rng rng(deriveSeed(seed, static_cast<std::uint64_t>(i),
                         static_cast<std::uint64_t>(t)));
      int received = 0;
      for (int p = 0; p < sent; ++p)
        if (!rng.bernoulli(channel.erasureRate)) ++received;
      realized[i] = received >= threshold ? successDistortion[i] : 1.0;
    }
    distortionSum += aggregateRealized(scenario, weights, realized, sessionAccum);
  }

  // Single omni link per UAV: the best beam of the bank carries everything.
  const LinkModel bank = makeBeamBank(1, pipeline.beams);
  double totalPower = 0.0;
  for (int i = 0; i < n; ++i)
    totalPower += rateToPower(uniformRate, bank.beams[0]);
  const double serialLatency = pipeline.layered.grid.frameInterval;

  ResultRow row;
  row.system = "Baseline";
  row.distortion = distortionSum / trials;
  row.quality = 1.0 / std::max(row.distortion, 1e-6);
  row.sessionDistortions = sessionAccum / trials;
  row.totalPower = totalPower;
  row.latencySeconds = serialLatency;
  row.seed = seed;
  return row;
}

namespace {

std::string canonicalConfigText(const ScenarioSpec& scenario,
                                const std::string& sweepName,
                                const std::vector<double>& grid,
                                const PipelineConfig& config,
                                const BaselineConfig& baseline,
                                std::uint64_t seed) {
  std::ostringstream os;
  os << sweepName << "|C=" << scenario.capacity << "|N=" << scenario.uavCount()
     << "|K=" << scenario.sessionCount() << "|grid=";
  for (double g : grid) os << fmtDouble(g) << ",";
  os << "|layers=" << config.layered.layers
     << "|dl=" << fmtDouble(config.layered.deltaLambda)
     << "|sym=" << config.layered.grid.symbolSize
     << "|trials=" << config.channelTrials
     << "|estimator=" << (config.channelEstimator == PrefixEstimator::Hall ? "hall" : "rank")
     << "|fec=" << fmtDouble(baseline.fecOverhead)
     << "|block=" << baseline.blockLength << "|seed=" << seed;
  return os.str();
}

}  // namespace

std::string configHash(const std::string& canonicalText) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonicalText) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

ExperimentResult sweepReliability(const ScenarioSpec& scenario,
                                  const std::vector<double>& erasureRates,
                                  const PipelineConfig& config,
                                  const BaselineConfig& baseline,
                                  std::uint64_t seed) {
  if (erasureRates.empty()) throw ConfigError("empty sweep grid");
  const AggregatedWeights weights = aggregateWeights(scenario);
  const SwarmDesign design =
      designSwarm(scenario, weights, scenario.capacity, config);

  ExperimentResult result;
  result.sessionCount = scenario.sessionCount();
  result.seed = seed;
  result.trials = config.channelTrials;
  result.configHash = configHash(canonicalConfigText(
      scenario, "reliability", erasureRates, config, baseline, seed));
  for (std::size_t p = 0; p < erasureRates.size(); ++p) {
    ChannelConfig channel{erasureRates[p], scenario.capacity,
                          scenario.capacity};
    ResultRow opt = simulateOptimal(scenario, weights, design, channel, config,
                                    deriveSeed(seed, p, 0));
    opt.sweepVar = erasureRates[p];
    result.rows.push_back(std::move(opt));
    ResultRow base = runBaselinePipeline(scenario, channel, baseline, config,
                                         deriveSeed(seed, p, 1));
    base.sweepVar = erasureRates[p];
    result.rows.push_back(std::move(base));
  }
  return result;
}

ExperimentResult sweepAdaptivity(const ScenarioSpec& scenario,
                                 const std::vector<double>& mismatches,
                                 const PipelineConfig& config,
                                 const BaselineConfig& baseline,
                                 std::uint64_t seed) {
  if (mismatches.empty()) throw ConfigError("empty sweep grid");
  const AggregatedWeights weights = aggregateWeights(scenario);
  const SwarmDesign design =
      designSwarm(scenario, weights, scenario.capacity, config);

  ExperimentResult result;
  result.sessionCount = scenario.sessionCount();
  result.seed = seed;
  result.trials = config.channelTrials;
  result.configHash = configHash(canonicalConfigText(
      scenario, "adaptivity", mismatches, config, baseline, seed));
  for (std::size_t p = 0; p < mismatches.size(); ++p) {
    const double mismatch = mismatches[p];
    if (!(mismatch >= 0.0 && mismatch < 1.0))
      throw ConfigError("capacity mismatch must lie in [0, 1)");
    ChannelConfig channel{0.0, scenario.capacity * (1.0 - mismatch),
                          scenario.capacity};
    ResultRow opt = simulateOptimal(scenario, weights, design, channel, config,
                                    deriveSeed(seed, p, 0));
    opt.sweepVar = mismatch;
    result.rows.push_back(std::move(opt));
    ResultRow base = runBaselinePipeline(scenario, channel, baseline, config,
                                         deriveSeed(seed, p, 1));
    base.sweepVar = mismatch;
    result.rows.push_back(std::move(base));
  }
  return result;
}

ExperimentResult sweepCapacity(const ScenarioSpec& scenario,
                               const std::vector<double>& capacities,
                               const PipelineConfig& config,
                               const BaselineConfig& baseline,
                               std::uint64_t seed) {
  if (capacities.empty()) throw ConfigError("empty sweep grid");
  const AggregatedWeights weights = aggregateWeights(scenario);

  ExperimentResult result;
  result.sessionCount = scenario.sessionCount();
  result.seed = seed;
  result.trials = config.channelTrials;
  result.configHash = configHash(canonicalConfigText(
      scenario, "capacity", capacities, config, baseline, seed));
  for (std::size_t p = 0; p < capacities.size(); ++p) {
    const double cap = capacities[p];
    if (!(cap > 0.0)) throw ConfigError("capacity grid must be positive");
    const SwarmDesign design = designSwarm(scenario, weights, cap, config);
    ChannelConfig channel{0.0, cap, cap};
    ResultRow opt = simulateOptimal(scenario, weights, design, channel, config,
                                    deriveSeed(seed, p, 0));
    opt.sweepVar = cap;
    result.rows.push_back(std::move(opt));
    ResultRow base = runBaselinePipeline(scenario, channel, baseline, config,
                                         deriveSeed(seed, p, 1));
    base.sweepVar = cap;
    result.rows.push_back(std::move(base));
  }
  return result;
}

ScenarioSpec defaultScenario() {
  ScenarioSpec s;
  s.capacity = 12.0;
  s.dibrPolyDegree = 1;
  s.dibrSynthesisPenalty = 0.0;
  s.quadratureGridSize = 512;
  const double positions[] = {0.04, 0.18, 0.31, 0.45, 0.55, 0.69, 0.82, 0.96};
  const double betas[] = {1.7, 0.7, 1.25, 0.95, 1.5, 0.8, 1.1, 0.65};
  for (int i = 0; i < 8; ++i)
    s.viewpoints.push_back({i + 1, positions[i], betas[i]});
  struct SessionSeed {
    int first;
    double mean;
    double std;
  };
  const SessionSeed seeds[] = {{1, 0.18, 0.10}, {2, 0.31, 0.08},
                               {3, 0.45, 0.09}, {4, 0.58, 0.10},
                               {5, 0.70, 0.08}, {6, 0.85, 0.11}};
  for (int k = 0; k < 6; ++k) {
    SessionSpec sess;
    sess.id = k + 1;
    sess.members = {seeds[k].first, seeds[k].first + 1, seeds[k].first + 2};
    sess.priority = 1.0;
    sess.maxDistortion = 1.0;
    sess.popularityMean = seeds[k].mean;
    sess.popularityStd = seeds[k].std;
    s.sessions.push_back(std::move(sess));
  }
  return s;
}

PipelineConfig defaultPipelineConfig() {
  PipelineConfig cfg;
  cfg.layered.layers = 4;
  cfg.layered.deltaLambda = 0.05;
  cfg.layered.grid = {4096, 1.0, 1e6};
  cfg.layered.estimator = {PrefixEstimator::Hall, 3000, 77};
  cfg.sourceMargin = 0.05;
  cfg.designErasureRate = 0.0;
  cfg.channelEstimator = PrefixEstimator::Hall;
  cfg.channelTrials = 1000;
  return cfg;
}

std::string toCsv(const ExperimentResult& result) {
  std::ostringstream os;
  os << "sweep_var,system,quality,distortion";
  for (int s = 1; s <= result.sessionCount; ++s) os << ",d_session_" << s;
  os << ",total_power,latency_s,seed\n";
  for (const auto& row : result.rows) {
    os << fmtDouble(row.sweepVar) << ',' << row.system << ','
       << fmtDouble(row.quality) << ',' << fmtDouble(row.distortion);
    for (int s = 0; s < result.sessionCount; ++s)
      os << ',' << fmtDouble(row.sessionDistortions[s]);
    os << ',' << fmtDouble(row.totalPower) << ','
       << fmtDouble(row.latencySeconds) << ',' << row.seed << '\n';
  }
  return os.str();
}

std::string manifestText(const ExperimentResult& result,
                         const std::vector<std::pair<std::string, double>>&
                             stageSeconds) {
  std::ostringstream os;
  os << "config_hash=" << result.configHash << '\n'
     << "seed=" << result.seed << '\n'
     << "trials=" << result.trials << '\n'
     << "rows=" << result.rows.size() << '\n';
  for (const auto& [name, seconds] : stageSeconds)
    os << "stage_" << name << "_seconds=" << fmtDouble(seconds) << '\n';
  return os.str();
}

}  // namespace uavsense
