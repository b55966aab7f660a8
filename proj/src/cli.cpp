#include "uavsense/cli.hpp"

#include "uavsense/scenario_io.hpp"
#include "uavsense/sim_harness.hpp"
#include "uavsense/types.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>

namespace uavsense {

namespace {

struct CommonOpts {
  std::string scenarioPath;
  std::uint64_t seed = 1;
  int trials = 1000;
  std::string outDir = "out";
  std::string estimator = "hall";
  std::string grid;
  double deltaLambda = 0.05;
  int layers = 4;
  double fecOverhead = 0.03;
  int blockLength = 100;
};

void addCommonFlags(CLI::App* cmd, CommonOpts& opts, bool needsScenario) {
  auto* sc = cmd->add_option("--scenario", opts.scenarioPath,
                             "scenario config file");
  if (needsScenario) sc->required();
  cmd->add_option("--seed", opts.seed, "master seed");
  cmd->add_option("--trials", opts.trials, "Monte-Carlo channel trials");
  cmd->add_option("--out", opts.outDir, "output directory");
  cmd->add_option("--estimator", opts.estimator,
                  "prefix-decode estimator: rank or hall")
      ->check(CLI::IsMember({"rank", "hall"}));
  cmd->add_option("--grid", opts.grid, "comma-separated sweep grid");
  cmd->add_option("--delta-lambda", opts.deltaLambda,
                  "window-distribution step");
  cmd->add_option("--layers", opts.layers, "scalable layer count");
  cmd->add_option("--fec-overhead", opts.fecOverhead,
                  "baseline FEC overhead fraction");
  cmd->add_option("--block-length", opts.blockLength,
                  "baseline FEC block length in packets");
}

PipelineConfig pipelineFrom(const CommonOpts& opts) {
  PipelineConfig cfg = defaultPipelineConfig();
  cfg.layered.layers = opts.layers;
  cfg.layered.deltaLambda = opts.deltaLambda;
  cfg.channelTrials = opts.trials;
  const PrefixEstimator mode = opts.estimator == "rank"
                                   ? PrefixEstimator::ExactRank
                                   : PrefixEstimator::Hall;
  cfg.channelEstimator = mode;
  cfg.layered.estimator.mode = mode;
  return cfg;
}

std::vector<double> parseGrid(const std::string& text,
                              std::vector<double> fallback) {
  if (text.empty()) return fallback;
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      grid.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("bad grid entry '" + item + "'");
    }
  }
  if (grid.empty()) throw ConfigError("empty sweep grid");
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw ConfigError("sweep grid must be sorted ascending");
  return grid;
}

std::string fmtDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

using Clock = std::chrono::steady_clock;

double secondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void writeSweepOutputs(const std::string& outDir, const std::string& name,
                       const ExperimentResult& result,
                       const std::vector<std::pair<std::string, double>>&
                           stages) {
  writeFileAtomic(outDir + "/" + name + ".csv", toCsv(result));
  writeFileAtomic(outDir + "/" + name + "_manifest.txt",
                  manifestText(result, stages));
  std::cout << "wrote " << outDir << "/" << name << ".csv (" << result.rows.size()
            << " rows)\n";
}

int cmdAllocate(const CommonOpts& opts) {
  const ScenarioSpec scenario = parseScenario(opts.scenarioPath);
  const AggregatedWeights weights = aggregateWeights(scenario);
  const AllocationResult alloc = solveAllocation(scenario, weights);
  std::ostringstream csv;
  csv << "uav,rate,alpha,beta\n";
  for (int i = 0; i < scenario.uavCount(); ++i)
    csv << scenario.viewpoints[i].id << ',' << fmtDouble(alloc.rates.rates[i])
        << ',' << fmtDouble(weights.alpha[i]) << ','
        << fmtDouble(scenario.viewpoints[i].beta) << '\n';
  writeFileAtomic(opts.outDir + "/allocation.csv", csv.str());
  std::ostringstream manifest;
  manifest << "objective=" << fmtDouble(alloc.objective) << '\n'
           << "kkt_residual=" << fmtDouble(alloc.kktResidual) << '\n'
           << "capacity_multiplier=" << fmtDouble(alloc.capacityMultiplier)
           << '\n';
  writeFileAtomic(opts.outDir + "/allocation_manifest.txt", manifest.str());
  std::cout << "objective " << fmtDouble(alloc.objective) << ", wrote "
            << opts.outDir << "/allocation.csv\n";
  return 0;
}

int cmdLayerOpt(const CommonOpts& opts) {
  const ScenarioSpec scenario = parseScenario(opts.scenarioPath);
  const AggregatedWeights weights = aggregateWeights(scenario);
  PipelineConfig cfg = pipelineFrom(opts);
  const SwarmDesign design =
      designSwarm(scenario, weights, scenario.capacity, cfg);
  std::ostringstream csv;
  csv << "uav,layer,layer_rate,lambda,expected_distortion\n";
  for (int i = 0; i < scenario.uavCount(); ++i) {
    const UavDesign& uav = design.uavs[i];
    if (!uav.active) continue;
    for (int l = 0; l < uav.design.allocation.layers(); ++l)
      csv << scenario.viewpoints[i].id << ',' << (l + 1) << ','
          << fmtDouble(uav.design.allocation.layerRates[l]) << ','
          << fmtDouble(uav.design.lambda.lambda[l]) << ','
          << fmtDouble(uav.design.expectedDistortion) << '\n';
  }
  writeFileAtomic(opts.outDir + "/layers.csv", csv.str());
  std::cout << "wrote " << opts.outDir << "/layers.csv\n";
  return 0;
}

int cmdPower(const CommonOpts& opts, const std::string& ratesText,
             const std::string& gainsText, double bandwidth, double noise,
             double budget) {
  std::ostringstream csv;
  if (!ratesText.empty()) {
    // Fixture mode: explicit layer rates and beam gains.
    const std::vector<double> rates = parseGrid(ratesText, {});
    const std::vector<double> gains = parseGrid(gainsText, {});
    if (rates.size() != gains.size())
      throw ConfigError("--rates and --gains must have equal length");
    LinkModel links;
    Vec rateVec(rates.size());
    for (std::size_t i = 0; i < rates.size(); ++i) {
      rateVec[static_cast<Eigen::Index>(i)] = rates[i];
      links.beams.push_back({gains[i], bandwidth, noise});
    }
    const PowerSchedule sched = schedule(rateVec, links, budget);
    csv << "layer,beam,power\n";
    for (Eigen::Index l = 0; l < rateVec.size(); ++l)
      csv << (l + 1) << ',' << (sched.assignment[l] + 1) << ','
          << fmtDouble(sched.powers[l]) << '\n';
    writeFileAtomic(opts.outDir + "/power.csv", csv.str());
    std::cout << "total_power " << fmtDouble(sched.totalPower)
              << (sched.feasible ? "" : " (infeasible)") << "\n";
    return 0;
  }
  const ScenarioSpec scenario = parseScenario(opts.scenarioPath);
  const AggregatedWeights weights = aggregateWeights(scenario);
  PipelineConfig cfg = pipelineFrom(opts);
  const SwarmDesign design =
      designSwarm(scenario, weights, scenario.capacity, cfg);
  csv << "uav,layer,beam,power\n";
  double total = 0.0;
  for (int i = 0; i < scenario.uavCount(); ++i) {
    const UavDesign& uav = design.uavs[i];
    if (!uav.active) continue;
    total += uav.power.totalPower;
    for (int l = 0; l < uav.design.allocation.layers(); ++l)
      csv << scenario.viewpoints[i].id << ',' << (l + 1) << ','
          << (uav.power.assignment[l] + 1) << ','
          << fmtDouble(uav.power.powers[l]) << '\n';
  }
  writeFileAtomic(opts.outDir + "/power.csv", csv.str());
  std::cout << "total_power " << fmtDouble(total) << "\n";
  return 0;
}

int cmdSimulate(const CommonOpts& opts, double epsilon, double capacityActual,
                double capacityTarget) {
  const ScenarioSpec scenario = parseScenario(opts.scenarioPath);
  PipelineConfig cfg = pipelineFrom(opts);
  BaselineConfig baseline{opts.fecOverhead, opts.blockLength};
  const double target = capacityTarget > 0.0 ? capacityTarget : scenario.capacity;
  const double actual = capacityActual > 0.0 ? capacityActual : target;
  ChannelConfig channel{epsilon, actual, target};

  const auto start = Clock::now();
  ExperimentResult result;
  result.sessionCount = scenario.sessionCount();
  result.seed = opts.seed;
  result.trials = cfg.channelTrials;
  result.configHash =
      configHash("simulate|" + emitScenario(scenario) + "|eps=" +
                 fmtDouble(epsilon) + "|actual=" + fmtDouble(actual) +
                 "|target=" + fmtDouble(target) + "|seed=" +
                 std::to_string(opts.seed));
  ResultRow opt =
      runOptimalPipeline(scenario, channel, cfg, deriveSeed(opts.seed, 0, 0));
  opt.sweepVar = epsilon;
  result.rows.push_back(std::move(opt));
  ResultRow base = runBaselinePipeline(scenario, channel, baseline, cfg,
                                       deriveSeed(opts.seed, 0, 1));
  base.sweepVar = epsilon;
  result.rows.push_back(std::move(base));
  writeSweepOutputs(opts.outDir, "simulate", result,
                    {{"total", secondsSince(start)}});
  return 0;
}

int cmdSweep(const CommonOpts& opts, const std::string& which) {
  const ScenarioSpec scenario = parseScenario(opts.scenarioPath);
  PipelineConfig cfg = pipelineFrom(opts);
  BaselineConfig baseline{opts.fecOverhead, opts.blockLength};
  const auto start = Clock::now();
  ExperimentResult result;
  if (which == "reliability") {
    const auto grid = parseGrid(
        opts.grid, {0.0, 0.02, 0.04, 0.06, 0.08, 0.10, 0.12, 0.14, 0.16, 0.18,
                    0.20});
    result = sweepReliability(scenario, grid, cfg, baseline, opts.seed);
  } else if (which == "adaptivity") {
    const auto grid = parseGrid(opts.grid, {0.0, 0.05, 0.10, 0.20});
    result = sweepAdaptivity(scenario, grid, cfg, baseline, opts.seed);
  } else {
    const auto grid = parseGrid(opts.grid, {4.0, 6.0, 8.0, 10.0, 12.0, 16.0});
    result = sweepCapacity(scenario, grid, cfg, baseline, opts.seed);
  }
  writeSweepOutputs(opts.outDir, "sweep_" + which, result,
                    {{"total", secondsSince(start)}});
  return 0;
}

int cmdGenScenario(const CommonOpts& opts, const SyntheticSceneParams& params) {
  const ScenarioSpec scenario = generateScenario(params, opts.seed);
  writeFileAtomic(opts.outDir + "/generated_scenario.cfg",
                  emitScenario(scenario));
  std::cout << "wrote " << opts.outDir << "/generated_scenario.cfg ("
            << scenario.uavCount() << " uavs, " << scenario.sessionCount()
            << " sessions)\n";
  return 0;
}

}  // namespace

int runCli(const std::vector<std::string>& args) {
  CLI::App app{"UAV swarm VR/AR sensing optimizer and channel simulator"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string ratesText, gainsText;
  double bandwidth = 1.0, noise = 1.0, powerBudget = 1e4;
  double epsilon = 0.0, capacityActual = -1.0, capacityTarget = -1.0;
  SyntheticSceneParams sceneParams;

  auto* allocate = app.add_subcommand("allocate", "solve the sampling-rate allocation");
  addCommonFlags(allocate, opts, true);

  auto* layerOpt = app.add_subcommand("layer-opt", "design per-UAV layering and window distribution");
  addCommonFlags(layerOpt, opts, true);

  auto* power = app.add_subcommand("power", "schedule beam powers");
  addCommonFlags(power, opts, false);
  power->add_option("--rates", ratesText, "explicit layer rates a,b,...");
  power->add_option("--gains", gainsText, "explicit beam gains a,b,...");
  power->add_option("--bandwidth", bandwidth, "beam bandwidth (fixture mode)");
  power->add_option("--noise", noise, "beam noise density (fixture mode)");
  power->add_option("--budget", powerBudget, "power budget p_T");

  auto* simulate = app.add_subcommand("simulate", "one channel point, both systems");
  addCommonFlags(simulate, opts, true);
  simulate->add_option("--epsilon", epsilon, "packet erasure rate");
  simulate->add_option("--capacity-actual", capacityActual, "delivery capacity");
  simulate->add_option("--capacity-target", capacityTarget, "design capacity C0");

  auto* sweepRel = app.add_subcommand("sweep-reliability", "quality vs packet loss");
  addCommonFlags(sweepRel, opts, true);
  auto* sweepAda = app.add_subcommand("sweep-adaptivity", "quality vs capacity mismatch");
  addCommonFlags(sweepAda, opts, true);
  auto* sweepCap = app.add_subcommand("sweep-capacity", "quality vs capacity");
  addCommonFlags(sweepCap, opts, true);

  auto* gen = app.add_subcommand("gen-scenario", "write a synthetic scenario");
  addCommonFlags(gen, opts, false);
  gen->add_option("--uavs", sceneParams.uavCount, "swarm size");
  gen->add_option("--sessions", sceneParams.sessionCount, "session count");
  gen->add_option("--sigma-z", sceneParams.surfaceStd, "surface geometry stddev");
  gen->add_option("--sigma-c", sceneParams.colorStd, "color stddev");
  gen->add_option("--sigma-q", sceneParams.quantStep, "quantization step");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (allocate->parsed()) return cmdAllocate(opts);
    if (layerOpt->parsed()) return cmdLayerOpt(opts);
    if (power->parsed())
      return cmdPower(opts, ratesText, gainsText, bandwidth, noise, powerBudget);
    if (simulate->parsed())
      return cmdSimulate(opts, epsilon, capacityActual, capacityTarget);
    if (sweepRel->parsed()) return cmdSweep(opts, "reliability");
    if (sweepAda->parsed()) return cmdSweep(opts, "adaptivity");
    if (sweepCap->parsed()) return cmdSweep(opts, "capacity");
    if (gen->parsed()) return cmdGenScenario(opts, sceneParams);
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace uavsense
