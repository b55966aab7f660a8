#pragma once

#include "uavsense/types.hpp"

#include <cstdint>
#include <vector>

namespace uavsense {

/// Window-selection probabilities over the L expanding windows.
struct WindowDistribution {
  Vec lambda;

  int layers() const { return static_cast<int>(lambda.size()); }

  /// Validates entries >= 0 and sum 1 within 1e-12.
  static WindowDistribution validated(Vec lambda);
};

/// Per-layer source rates and the symbol counts they map to.
/// sourceSymbolCounts[l] = llround(layerRates[l] * frameInterval * bytesPerRateUnit / symbolSize).
struct LayerAllocation {
  Vec layerRates;                      // rate units per layer
  int symbolSize = 256;                // payload bytes per symbol
  std::vector<int> sourceSymbolCounts; // per-layer symbol counts

  int layers() const { return static_cast<int>(sourceSymbolCounts.size()); }

  /// Cumulative counts K_l = sum of the first l layer counts; K_0 = 0 omitted.
  std::vector<int> cumulativeCounts() const;

  int totalSymbols() const;
};

/// Builds an allocation from explicit symbol counts (rates derived back from
/// the counts). Handy for codec-level tests and fixtures.
LayerAllocation allocationFromCounts(std::vector<int> counts, int symbolSize,
                                     double frameInterval = 1.0,
                                     double bytesPerRateUnit = 1.0);

struct CodedSymbol {
  int window = 0;                         // 1-based window index
  std::vector<std::uint8_t> coefficients; // length K_window
  std::vector<std::uint8_t> payload;      // length symbolSize
};

struct CodedSymbolBatch {
  std::vector<CodedSymbol> symbols;
  std::vector<int> sourceCounts;  // cumulative K_1..K_L it was encoded against
  int symbolSize = 0;
};

struct DecodeReport {
  int maxDecodablePrefix = 0;      // 0..L
  int matrixRank = 0;              // rank of the received coefficient matrix
  std::vector<int> prefixSpanDim;  // dim of decodable subspace per prefix l (size L)
};

/// Draws `count` coded symbols: window w ~ lambda, uniform GF(256)
/// coefficient row over the K_w source symbols, payload = combination of the
/// source payloads. `source` holds L layers, layer l sized counts[l]*symbolSize.
CodedSymbolBatch encode(const std::vector<std::vector<std::uint8_t>>& source,
                        const LayerAllocation& alloc,
                        const WindowDistribution& lambda, int count,
                        std::uint64_t seed);

/// Gaussian elimination over GF(256). Returns the largest decodable layer
/// prefix (every source symbol of layers 1..l recoverable) and the recovered
/// layer payloads for that prefix.
std::pair<DecodeReport, std::vector<std::vector<std::uint8_t>>> decode(
    const CodedSymbolBatch& batch);

/// Rank-only classification of the max decodable prefix given coefficient
/// rows; payloads are not touched. Rows are (window, coefficients).
int maxDecodablePrefixByRank(
    const std::vector<std::pair<int, std::vector<std::uint8_t>>>& rows,
    const std::vector<int>& cumCounts);

/// Nested counting condition on per-window received counts: prefix l passes
/// iff some m >= l has sum_{t=j..m} N_t >= K_m - K_{j-1} for every j <= m.
/// Necessary and, over GF(256), sufficient up to O(1/256) coefficient
/// degeneracies; the rank path is authoritative.
bool hallDecodable(const std::vector<int>& receivedPerWindow,
                   const std::vector<int>& cumCounts, int prefix);

/// Max prefix per the counting condition (monotone in l by construction).
int maxDecodablePrefixByCounting(const std::vector<int>& receivedPerWindow,
                                 const std::vector<int>& cumCounts);

enum class PrefixEstimator { ExactRank, Hall };

/// Monte-Carlo distribution of the max decodable prefix. Per trial, draws T
/// per-symbol window assignments ~ lambda and i.i.d. Bernoulli(epsilon)
/// erasures, classifies the survivor set, and tallies. Entry l of the result
/// is Pr(max decodable prefix == l), l = 0..L; entries sum to 1 exactly.
Vec estimatePrefixProbabilities(const WindowDistribution& lambda,
                                const std::vector<int>& perLayerCounts,
                                int sentCount, double erasureRate, int trials,
                                std::uint64_t seed, PrefixEstimator mode);

/// Wire form used by golden-file tests: per symbol, 2-byte LE window index,
/// 2-byte LE coefficient length, coefficients, payload.
std::vector<std::uint8_t> serializeSymbols(const CodedSymbolBatch& batch);
CodedSymbolBatch deserializeSymbols(const std::vector<std::uint8_t>& bytes,
                                    std::vector<int> sourceCounts,
                                    int symbolSize);

}  // namespace uavsense
