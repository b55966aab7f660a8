#pragma once

#include "uavsense/scene_model.hpp"
#include "uavsense/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace uavsense {

/// Scenario file contents: the scenario itself plus the optional fixed
/// window distribution some codec-level commands accept.
struct ParsedScenario {
  ScenarioSpec scenario;
  std::optional<std::vector<double>> lambda;
};

/// Parses the flat key/value format with repeated `uav { ... }` and
/// `session { ... }` blocks. Errors carry `<path>:<line>:` anchors and name
/// the offending key.
ParsedScenario parseScenarioFile(const std::string& path);
ParsedScenario parseScenarioText(const std::string& text,
                                 const std::string& pathForErrors = "<input>");

/// Convenience wrapper returning just the validated ScenarioSpec.
ScenarioSpec parseScenario(const std::string& path);

std::string emitScenario(const ScenarioSpec& scenario,
                         const std::optional<std::vector<double>>& lambda = {});

/// Synthetic-scene knobs: scene-geometry and color entropies map to the
/// distortion-rate exponents (higher entropy needs more rate, smaller beta).
struct SyntheticSceneParams {
  double surfaceStd = 0.0;   // sigma_z
  double colorStd = 0.0;     // sigma_c
  double quantStep = 1.0;    // sigma_Q > 0
  int uavCount = 8;
  int sessionCount = 6;
};

ScenarioSpec generateScenario(const SyntheticSceneParams& params,
                              std::uint64_t seed);

/// Writes via temp file + rename so readers never observe partial output.
void writeFileAtomic(const std::string& path, const std::string& contents);

}  // namespace uavsense
