#pragma once

#include "uavsense/beam_power.hpp"
#include "uavsense/layered_opt.hpp"
#include "uavsense/rate_alloc.hpp"
#include "uavsense/scene_model.hpp"
#include "uavsense/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace uavsense {

struct ChannelConfig {
  double erasureRate = 0.0;      // epsilon in [0, 1)
  double capacityActual = 12.0;  // delivery-time capacity
  double capacityTarget = 12.0;  // capacity the representation was built for
};

/// Conventional reference: uniform rates, single-layer source, fixed-rate
/// MDS block FEC.
struct BaselineConfig {
  double fecOverhead = 0.03;
  int blockLength = 100;  // packets per frame block
};

/// Parameters of the per-UAV multi-beam link bank; beam b gets gain
/// gainTop * gainDecay^b with shared bandwidth and noise density.
struct BeamBankParams {
  double gainTop = 2.0;
  double gainDecay = 0.8;
  double bandwidth = 4.0;
  double noiseDensity = 1.0;
  double powerBudget = 1e4;  // p_T, generous by assumption
};

struct PipelineConfig {
  LayeredOptConfig layered;
  /// Fraction of each UAV's sampling rate reserved for coded redundancy:
  /// source layers carry R_i (1 - sourceMargin), the channel budget stays
  /// T_i = floor(R_i * frame / symbol).
  double sourceMargin = 0.08;
  double designErasureRate = 0.0;  // loss rate the window distribution targets
  BeamBankParams beams;
  PrefixEstimator channelEstimator = PrefixEstimator::Hall;
  int channelTrials = 1000;
  int boundTightenIters = 3;
  AllocationConfig allocation;
};

struct ResultRow {
  double sweepVar = 0.0;
  std::string system;  // "Optimal" or "Baseline"
  double quality = 0.0;
  double distortion = 0.0;
  Vec sessionDistortions;
  double totalPower = 0.0;
  double latencySeconds = 0.0;
  std::uint64_t seed = 0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  int sessionCount = 0;
  std::uint64_t seed = 0;
  int trials = 0;
  std::string configHash;
};

/// Per-UAV outcome of the three design stages.
struct UavDesign {
  bool active = false;   // sensed at all (enough rate for one symbol)
  double rate = 0.0;     // allocated sampling rate R_i
  int sentCount = 0;     // channel budget T_i at design capacity
  LayeredDesign design;
  LinkModel links;
  PowerSchedule power;
  double parallelLatency = 0.0;
  double serialLatency = 0.0;
};

struct SwarmDesign {
  AllocationResult allocation;
  std::vector<UavDesign> uavs;
  double totalPower = 0.0;
  double meanParallelLatency = 0.0;
};

struct LatencyPair {
  double parallelSeconds = 0.0;  // max over beams
  double serialSeconds = 0.0;    // all bytes over the best beam at summed power
};

/// Multi-beam parallel latency vs single-beam serial reference for one
/// designed representation. Window-l traffic is its expected share
/// lambda_l * T symbols.
LatencyPair latencyEstimate(const LayeredDesign& design,
                            const PowerSchedule& power, const LinkModel& links,
                            const SymbolGrid& grid, int sentCount);

/// Stages 1-3 at the given design capacity: rate allocation (with session
/// bounds tightened until the coding-aware session distortions honor them),
/// per-UAV layered design, and power scheduling.
SwarmDesign designSwarm(const ScenarioSpec& scenario,
                        const AggregatedWeights& weights, double designCapacity,
                        const PipelineConfig& config);

/// Erasure-channel Monte Carlo of a designed swarm under the given channel.
ResultRow simulateOptimal(const ScenarioSpec& scenario,
                          const AggregatedWeights& weights,
                          const SwarmDesign& design,
                          const ChannelConfig& channel,
                          const PipelineConfig& config, std::uint64_t seed);

/// Design + simulate in one call.
ResultRow runOptimalPipeline(const ScenarioSpec& scenario,
                             const ChannelConfig& channel,
                             const PipelineConfig& config, std::uint64_t seed);

ResultRow runBaselinePipeline(const ScenarioSpec& scenario,
                              const ChannelConfig& channel,
                              const BaselineConfig& config,
                              const PipelineConfig& pipeline,
                              std::uint64_t seed);

ExperimentResult sweepReliability(const ScenarioSpec& scenario,
                                  const std::vector<double>& erasureRates,
                                  const PipelineConfig& config,
                                  const BaselineConfig& baseline,
                                  std::uint64_t seed);

ExperimentResult sweepAdaptivity(const ScenarioSpec& scenario,
                                 const std::vector<double>& mismatches,
                                 const PipelineConfig& config,
                                 const BaselineConfig& baseline,
                                 std::uint64_t seed);

ExperimentResult sweepCapacity(const ScenarioSpec& scenario,
                               const std::vector<double>& capacities,
                               const PipelineConfig& config,
                               const BaselineConfig& baseline,
                               std::uint64_t seed);

/// The 6-session, 8-UAV scenario used as the default experiment subject.
ScenarioSpec defaultScenario();

/// Defaults sized so desk-scale sweeps stay fast: 16 KiB symbols over
/// MB/s rate units, 4 layers, counting-mode estimators.
PipelineConfig defaultPipelineConfig();

/// Fixed CSV schema: sweep_var, system, quality, distortion,
/// d_session_1..K, total_power, latency_s, seed.
std::string toCsv(const ExperimentResult& result);

/// Run manifest: config hash, seed, trials, per-stage wall times.
std::string manifestText(const ExperimentResult& result,
                         const std::vector<std::pair<std::string, double>>&
                             stageSeconds);

/// FNV-1a hash of a canonical config description.
std::string configHash(const std::string& canonicalText);

}  // namespace uavsense
