#include "uavsense/scenario_io.hpp"

#include "uavsense/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace uavsense {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) {
    if (tok[0] == '#') break;
    tokens.push_back(tok);
  }
  return tokens;
}

[[noreturn]] void fail(const std::string& path, int line,
                       const std::string& message) {
  throw ConfigError(path + ":" + std::to_string(line) + ": " + message);
}

double parseNumber(const std::string& path, int line, const std::string& key,
                   const std::string& text) {
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    fail(path, line, "key '" + key + "' expects a decimal number, got '" +
                         text + "'");
  return value;
}

long parseInteger(const std::string& path, int line, const std::string& key,
                  const std::string& text) {
  long value = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    fail(path, line, "key '" + key + "' expects an integer, got '" + text +
                         "'");
  return value;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ParsedScenario parseScenarioText(const std::string& text,
                                 const std::string& path) {
  ParsedScenario out;
  ScenarioSpec& spec = out.scenario;
  bool sawCapacity = false;

  enum class Block { None, Uav, Session };
  Block block = Block::None;
  int blockLine = 0;
  Viewpoint vp;
  SessionSpec sess;
  std::vector<std::string> seen;

  auto require = [&](const char* key) {
    if (std::find(seen.begin(), seen.end(), key) == seen.end())
      fail(path, blockLine, std::string("missing field '") + key + "'");
  };
  auto markSeen = [&](const std::string& key, int line) {
    if (std::find(seen.begin(), seen.end(), key) != seen.end())
      fail(path, line, "duplicate field '" + key + "'");
    seen.push_back(key);
  };

  std::istringstream is(text);
  std::string line;
  int lineNo = 0;
  while (std::getline(is, line)) {
    ++lineNo;
    const auto tokens = tokenize(line);
    if (tokens.empty()) continue;
    const std::string& key = tokens[0];

    if (block == Block::None) {
      if (key == "uav" || key == "session") {
        if (tokens.size() != 2 || tokens[1] != "{")
          fail(path, lineNo, "expected '" + key + " {'");
        block = key == "uav" ? Block::Uav : Block::Session;
        blockLine = lineNo;
        vp = Viewpoint{};
        sess = SessionSpec{};
        seen.clear();
        continue;
      }
      if (key == "capacity") {
        if (tokens.size() != 2) fail(path, lineNo, "capacity expects one value");
        spec.capacity = parseNumber(path, lineNo, key, tokens[1]);
        sawCapacity = true;
      } else if (key == "dibr_poly_degree") {
        if (tokens.size() != 2) fail(path, lineNo, "dibr_poly_degree expects one value");
        spec.dibrPolyDegree =
            static_cast<int>(parseInteger(path, lineNo, key, tokens[1]));
      } else if (key == "dibr_synthesis_penalty") {
        if (tokens.size() != 2) fail(path, lineNo, "dibr_synthesis_penalty expects one value");
        spec.dibrSynthesisPenalty = parseNumber(path, lineNo, key, tokens[1]);
      } else if (key == "quadrature_grid") {
        if (tokens.size() != 2) fail(path, lineNo, "quadrature_grid expects one value");
        spec.quadratureGridSize =
            static_cast<int>(parseInteger(path, lineNo, key, tokens[1]));
      } else if (key == "lambda") {
        if (tokens.size() < 2) fail(path, lineNo, "lambda expects at least one value");
        std::vector<double> lambda;
        double sum = 0.0;
        for (std::size_t i = 1; i < tokens.size(); ++i) {
          lambda.push_back(parseNumber(path, lineNo, key, tokens[i]));
          if (lambda.back() < 0.0)
            fail(path, lineNo, "lambda entries must be non-negative");
          sum += lambda.back();
        }
        if (std::abs(sum - 1.0) > 1e-12)
          fail(path, lineNo, "lambda must sum to 1");
        out.lambda = std::move(lambda);
      } else {
        fail(path, lineNo, "unknown key '" + key + "'");
      }
      continue;
    }

    if (key == "}") {
      if (block == Block::Uav) {
        require("id");
        require("position");
        require("beta");
        spec.viewpoints.push_back(vp);
      } else {
        require("id");
        require("members");
        require("priority");
        require("max_distortion");
        require("popularity_mean");
        require("popularity_std");
        spec.sessions.push_back(sess);
      }
      block = Block::None;
      continue;
    }

    if (block == Block::Uav) {
      if (tokens.size() != 2)
        fail(path, lineNo, "uav field '" + key + "' expects one value");
      markSeen(key, lineNo);
      if (key == "id")
        vp.id = static_cast<int>(parseInteger(path, lineNo, key, tokens[1]));
      else if (key == "position")
        vp.position = parseNumber(path, lineNo, key, tokens[1]);
      else if (key == "beta")
        vp.beta = parseNumber(path, lineNo, key, tokens[1]);
      else
        fail(path, lineNo, "unknown uav field '" + key + "'");
      continue;
    }

    // Session block.
    markSeen(key, lineNo);
    if (key == "id") {
      if (tokens.size() != 2) fail(path, lineNo, "id expects one value");
      sess.id = static_cast<int>(parseInteger(path, lineNo, key, tokens[1]));
    } else if (key == "members") {
      if (tokens.size() < 2) fail(path, lineNo, "members expects at least one id");
      for (std::size_t i = 1; i < tokens.size(); ++i)
        sess.members.push_back(
            static_cast<int>(parseInteger(path, lineNo, key, tokens[i])));
    } else if (key == "priority") {
      if (tokens.size() != 2) fail(path, lineNo, "priority expects one value");
      sess.priority = parseNumber(path, lineNo, key, tokens[1]);
    } else if (key == "max_distortion") {
      if (tokens.size() != 2) fail(path, lineNo, "max_distortion expects one value");
      sess.maxDistortion = parseNumber(path, lineNo, key, tokens[1]);
      if (!(sess.maxDistortion > 0.0 && sess.maxDistortion <= 1.0))
        fail(path, lineNo, "infeasible bound: max_distortion must lie in (0, 1]");
    } else if (key == "popularity_mean") {
      if (tokens.size() != 2) fail(path, lineNo, "popularity_mean expects one value");
      sess.popularityMean = parseNumber(path, lineNo, key, tokens[1]);
    } else if (key == "popularity_std") {
      if (tokens.size() != 2) fail(path, lineNo, "popularity_std expects one value");
      sess.popularityStd = parseNumber(path, lineNo, key, tokens[1]);
    } else {
      fail(path, lineNo, "unknown session field '" + key + "'");
    }
  }

  if (block != Block::None) fail(path, lineNo, "unterminated block");
  if (!sawCapacity) fail(path, lineNo, "missing field 'capacity'");
  try {
    validateScenario(spec);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return out;
}

ParsedScenario parseScenarioFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parseScenarioText(buf.str(), path);
}

ScenarioSpec parseScenario(const std::string& path) {
  return parseScenarioFile(path).scenario;
}

std::string emitScenario(const ScenarioSpec& scenario,
                         const std::optional<std::vector<double>>& lambda) {
  std::ostringstream os;
  os << "capacity " << fmt(scenario.capacity) << '\n'
     << "dibr_poly_degree " << scenario.dibrPolyDegree << '\n'
     << "dibr_synthesis_penalty " << fmt(scenario.dibrSynthesisPenalty) << '\n'
     << "quadrature_grid " << scenario.quadratureGridSize << '\n';
  if (lambda) {
    os << "lambda";
    for (double v : *lambda) os << ' ' << fmt(v);
    os << '\n';
  }
  for (const auto& vp : scenario.viewpoints) {
    os << "\nuav {\n"
       << "  id " << vp.id << '\n'
       << "  position " << fmt(vp.position) << '\n'
       << "  beta " << fmt(vp.beta) << '\n'
       << "}\n";
  }
  for (const auto& sess : scenario.sessions) {
    os << "\nsession {\n"
       << "  id " << sess.id << '\n'
       << "  members";
    for (int m : sess.members) os << ' ' << m;
    os << '\n'
       << "  priority " << fmt(sess.priority) << '\n'
       << "  max_distortion " << fmt(sess.maxDistortion) << '\n'
       << "  popularity_mean " << fmt(sess.popularityMean) << '\n'
       << "  popularity_std " << fmt(sess.popularityStd) << '\n'
       << "}\n";
  }
  return os.str();
}

ScenarioSpec generateScenario(const SyntheticSceneParams& params,
                              std::uint64_t seed) {
  if (params.surfaceStd < 0.0 || params.colorStd < 0.0)
    throw ConfigError("scene deviations must be non-negative");
  if (!(params.quantStep > 0.0))
    throw ConfigError("quantization step must be positive");
  if (params.uavCount < 1 || params.sessionCount < 1)
    throw ConfigError("uav and session counts must be positive");
  if (params.uavCount < params.sessionCount)
    throw ConfigError("need at least one uav per session");

  Rng rng(seed);
  ScenarioSpec spec;
  spec.capacity = 12.0;

  const int n = params.uavCount;
  // Mean exponent shrinks with scene entropy: rougher geometry and richer
  // color need more rate for the same distortion.
  const double base =
      1.6 / ((1.0 + 2.0 * params.surfaceStd * params.surfaceStd +
              0.5 * params.colorStd * params.colorStd) *
             (1.0 + 0.1 * params.quantStep));
  const double jitterStd = std::min(0.5, 0.4 * params.surfaceStd);
  for (int i = 0; i < n; ++i) {
    Viewpoint vp;
    vp.id = i + 1;
    vp.position = (i + 0.5 + 0.3 * (2.0 * rng.nextDouble() - 1.0)) / n;
    vp.beta = base * std::exp(jitterStd * rng.gaussian());
    spec.viewpoints.push_back(vp);
  }

  const int k = params.sessionCount;
  const int clusterSize = std::min(3, n);
  for (int s = 0; s < k; ++s) {
    SessionSpec sess;
    sess.id = s + 1;
    const double center = (s + 0.5) / k;
    // Members: the cluster of viewpoints nearest the session center.
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return std::abs(spec.viewpoints[a].position - center) <
             std::abs(spec.viewpoints[b].position - center);
    });
    std::vector<int> chosen(order.begin(), order.begin() + clusterSize);
    std::sort(chosen.begin(), chosen.end());
    for (int i : chosen) sess.members.push_back(spec.viewpoints[i].id);
    sess.priority = 1.0;
    sess.maxDistortion = 1.0;
    sess.popularityMean = center;
    sess.popularityStd = 0.08 + 0.04 * rng.nextDouble();
    spec.sessions.push_back(std::move(sess));
  }
  validateScenario(spec);
  return spec;
}

void writeFileAtomic(const std::string& path, const std::string& contents) {
  const std::filesystem::path target(path);
  if (target.has_parent_path())
    std::filesystem::create_directories(target.parent_path());
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
    out << contents;
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace uavsense
