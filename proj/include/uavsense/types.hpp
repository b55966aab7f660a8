#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace uavsense {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Raised on malformed scenarios, configs, or input files.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when a problem instance admits no feasible solution.
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Mixes a master seed with stream indices into an independent substream
/// seed. Sequential splitmix64 steps, one per index.
std::uint64_t deriveSeed(std::uint64_t master, std::uint64_t a,
                         std::uint64_t b = 0, std::uint64_t c = 0);

}  // namespace uavsense
