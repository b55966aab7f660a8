#include "uavsense/ew_codec.hpp"

#include "uavsense/gf256.hpp"
#include "uavsense/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace uavsense {

WindowDistribution WindowDistribution::validated(Vec lambda) {
  if (lambda.size() == 0)
    throw ConfigError("lambda must have at least one entry");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (!(lambda[i] >= 0.0))
      throw ConfigError("lambda entries must be non-negative");
    sum += lambda[i];
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw ConfigError("lambda must sum to 1");
  return WindowDistribution{std::move(lambda)};
}

std::vector<int> LayerAllocation::cumulativeCounts() const {
  std::vector<int> cum(sourceSymbolCounts.size());
  int running = 0;
  for (std::size_t l = 0; l < sourceSymbolCounts.size(); ++l) {
    if (sourceSymbolCounts[l] < 0)
      throw ConfigError("layer symbol counts must be non-negative");
    running += sourceSymbolCounts[l];
    cum[l] = running;
  }
  return cum;
}

int LayerAllocation::totalSymbols() const {
  return std::accumulate(sourceSymbolCounts.begin(), sourceSymbolCounts.end(),
                         0);
}

LayerAllocation allocationFromCounts(std::vector<int> counts, int symbolSize,
                                     double frameInterval,
                                     double bytesPerRateUnit) {
  LayerAllocation alloc;
  alloc.symbolSize = symbolSize;
  alloc.layerRates = Vec(counts.size());
  for (std::size_t l = 0; l < counts.size(); ++l)
    alloc.layerRates[static_cast<Eigen::Index>(l)] =
        static_cast<double>(counts[l]) * symbolSize /
        (frameInterval * bytesPerRateUnit);
  alloc.sourceSymbolCounts = std::move(counts);
  if (alloc.totalSymbols() < 1)
    throw ConfigError("allocation must contain at least one source symbol");
  return alloc;
}

namespace {

void validateWindows(const WindowDistribution& lambda,
                     const std::vector<int>& cumCounts) {
  if (static_cast<int>(cumCounts.size()) != lambda.layers())
    throw ConfigError("lambda length must equal layer count");
  for (int l = 0; l < lambda.layers(); ++l) {
    if (lambda.lambda[l] > 0.0 && cumCounts[l] == 0)
      throw ConfigError("window " + std::to_string(l + 1) +
                        " has zero source symbols");
  }
}

// Forward elimination visiting columns from the highest index downwards.
// After the column that starts prefix l has NOT yet been visited, the pivot
// count equals rank of the submatrix right of it, which yields
// dim{v in rowspace : supp(v) within first K_l columns} = rank - suffixRank.
struct SuffixRanks {
  int rank = 0;
  std::vector<int> suffixRankAt;  // suffixRankAt[c] = rank of columns >= c
};

SuffixRanks suffixGaussian(std::vector<std::vector<std::uint8_t>>& rows,
                           int width) {
  SuffixRanks out;
  out.suffixRankAt.assign(width + 1, 0);
  int rank = 0;
  const int nRows = static_cast<int>(rows.size());
  for (int c = width - 1; c >= 0; --c) {
    int pivot = -1;
    for (int r = rank; r < nRows; ++r) {
      if (rows[r][c] != 0) {
        pivot = r;
        break;
      }
    }
    if (pivot >= 0) {
      std::swap(rows[rank], rows[pivot]);
      const std::uint8_t invp = gf256::inv(rows[rank][c]);
      gf256::scaleRow(rows[rank].data(), invp, c + 1);
      for (int r = rank + 1; r < nRows; ++r) {
        if (rows[r][c] != 0)
          gf256::mulAddRow(rows[r].data(), rows[rank].data(), rows[r][c],
                           c + 1);
      }
      ++rank;
    }
    out.suffixRankAt[c] = rank;
  }
  out.rank = rank;
  return out;
}

DecodeReport reportFromRows(std::vector<std::vector<std::uint8_t>>& rows,
                            const std::vector<int>& cumCounts) {
  const int L = static_cast<int>(cumCounts.size());
  const int width = cumCounts.empty() ? 0 : cumCounts.back();
  const SuffixRanks ranks = suffixGaussian(rows, width);
  DecodeReport report;
  report.matrixRank = ranks.rank;
  report.prefixSpanDim.assign(L, 0);
  for (int l = 0; l < L; ++l) {
    const int kl = cumCounts[l];
    const int suffixRank = (kl >= width) ? 0 : ranks.suffixRankAt[kl];
    report.prefixSpanDim[l] = ranks.rank - suffixRank;
    if (report.prefixSpanDim[l] == kl) report.maxDecodablePrefix = l + 1;
  }
  return report;
}

}  // namespace

CodedSymbolBatch encode(const std::vector<std::vector<std::uint8_t>>& source,
                        const LayerAllocation& alloc,
                        const WindowDistribution& lambda, int count,
                        std::uint64_t seed) {
  if (count < 1) throw ConfigError("encode: count must be at least 1");
  const std::vector<int> cum = alloc.cumulativeCounts();
  validateWindows(lambda, cum);
  if (static_cast<int>(source.size()) != alloc.layers())
    throw ConfigError("encode: source layer count mismatch");
  for (int l = 0; l < alloc.layers(); ++l) {
    const std::size_t expected =
        static_cast<std::size_t>(alloc.sourceSymbolCounts[l]) *
        static_cast<std::size_t>(alloc.symbolSize);
    if (source[l].size() != expected)
      throw ConfigError("encode: layer " + std::to_string(l + 1) +
                        " has inconsistent size");
  }

  // Flat view of all source symbols in layer order.
  std::vector<const std::uint8_t*> symbolPtr;
  symbolPtr.reserve(cum.back());
  for (int l = 0; l < alloc.layers(); ++l)
    for (int s = 0; s < alloc.sourceSymbolCounts[l]; ++s)
      symbolPtr.push_back(source[l].data() +
                          static_cast<std::size_t>(s) * alloc.symbolSize);

  Rng rng(seed);
  CodedSymbolBatch batch;
  batch.sourceCounts = cum;
  batch.symbolSize = alloc.symbolSize;
  batch.symbols.reserve(count);
  const std::span<const double> probs(lambda.lambda.data(),
                                      static_cast<std::size_t>(lambda.layers()));
  for (int n = 0; n < count; ++n) {
    CodedSymbol sym;
    sym.window = rng.categorical(probs) + 1;
    const int kw = cum[sym.window - 1];
    sym.coefficients.resize(kw);
    for (int j = 0; j < kw; ++j) sym.coefficients[j] = rng.nextByte();
    sym.payload.assign(alloc.symbolSize, 0);
    for (int j = 0; j < kw; ++j)
      gf256::mulAddRow(sym.payload.data(), symbolPtr[j], sym.coefficients[j],
                       alloc.symbolSize);
    batch.symbols.push_back(std::move(sym));
  }
  return batch;
}

int maxDecodablePrefixByRank(
    const std::vector<std::pair<int, std::vector<std::uint8_t>>>& rows,
    const std::vector<int>& cumCounts) {
  const int width = cumCounts.empty() ? 0 : cumCounts.back();
  std::vector<std::vector<std::uint8_t>> mat;
  mat.reserve(rows.size());
  for (const auto& [window, coeffs] : rows) {
    if (window < 1 || window > static_cast<int>(cumCounts.size()))
      throw ConfigError("coded symbol has window index out of range");
    if (static_cast<int>(coeffs.size()) != cumCounts[window - 1])
      throw ConfigError("coefficient row length does not match its window");
    std::vector<std::uint8_t> padded(width, 0);
    std::copy(coeffs.begin(), coeffs.end(), padded.begin());
    mat.push_back(std::move(padded));
  }
  return reportFromRows(mat, cumCounts).maxDecodablePrefix;
}

std::pair<DecodeReport, std::vector<std::vector<std::uint8_t>>> decode(
    const CodedSymbolBatch& batch) {
  const std::vector<int>& cum = batch.sourceCounts;
  const int L = static_cast<int>(cum.size());
  const int width = cum.empty() ? 0 : cum.back();

  std::vector<std::vector<std::uint8_t>> coeffOnly;
  coeffOnly.reserve(batch.symbols.size());
  for (const auto& sym : batch.symbols) {
    if (sym.window < 1 || sym.window > L)
      throw ConfigError("coded symbol has window index out of range");
    if (static_cast<int>(sym.coefficients.size()) != cum[sym.window - 1])
      throw ConfigError("coefficient row length does not match its window");
    std::vector<std::uint8_t> padded(width, 0);
    std::copy(sym.coefficients.begin(), sym.coefficients.end(),
              padded.begin());
    coeffOnly.push_back(std::move(padded));
  }
  DecodeReport report = reportFromRows(coeffOnly, cum);

  std::vector<std::vector<std::uint8_t>> layers;
  const int prefix = report.maxDecodablePrefix;
  if (prefix == 0) return {report, layers};
  const int unknowns = cum[prefix - 1];

  // Solve for the first `unknowns` source symbols: forward echelon in
  // natural column order, then back-substitution over the pivot rows.
  const int stride = width + batch.symbolSize;
  std::vector<std::vector<std::uint8_t>> aug;
  aug.reserve(batch.symbols.size());
  for (const auto& sym : batch.symbols) {
    std::vector<std::uint8_t> row(stride, 0);
    std::copy(sym.coefficients.begin(), sym.coefficients.end(), row.begin());
    std::copy(sym.payload.begin(), sym.payload.end(), row.begin() + width);
    aug.push_back(std::move(row));
  }
  const int nRows = static_cast<int>(aug.size());
  std::vector<int> pivotRowOfCol(width, -1);
  int rank = 0;
  for (int c = 0; c < width && rank < nRows; ++c) {
    int pivot = -1;
    for (int r = rank; r < nRows; ++r) {
      if (aug[r][c] != 0) {
        pivot = r;
        break;
      }
    }
    if (pivot < 0) continue;
    std::swap(aug[rank], aug[pivot]);
    gf256::scaleRow(aug[rank].data() + c, gf256::inv(aug[rank][c]),
                    stride - c);
    for (int r = rank + 1; r < nRows; ++r) {
      if (aug[r][c] != 0)
        gf256::mulAddRow(aug[r].data() + c, aug[rank].data() + c, aug[r][c],
                         stride - c);
    }
    pivotRowOfCol[c] = rank;
    ++rank;
  }
  // Eliminate above each pivot, highest column first.
  for (int c = width - 1; c >= 0; --c) {
    const int pr = pivotRowOfCol[c];
    if (pr < 0) continue;
    for (int r = 0; r < pr; ++r) {
      if (aug[r][c] != 0)
        gf256::mulAddRow(aug[r].data() + c, aug[pr].data() + c, aug[r][c],
                         stride - c);
    }
  }

  layers.resize(prefix);
  int flat = 0;
  for (int l = 0; l < prefix; ++l) {
    const int count = cum[l] - (l == 0 ? 0 : cum[l - 1]);
    layers[l].resize(static_cast<std::size_t>(count) * batch.symbolSize);
    for (int s = 0; s < count; ++s, ++flat) {
      const int pr = pivotRowOfCol[flat];
      // Guaranteed by the rank classification above.
      if (pr < 0)
        throw std::logic_error("decode: missing pivot for decodable prefix");
      std::copy(aug[pr].begin() + width, aug[pr].end(),
                layers[l].begin() + static_cast<std::size_t>(s) *
                                        batch.symbolSize);
    }
  }
  (void)unknowns;
  return {report, layers};
}

bool hallDecodable(const std::vector<int>& receivedPerWindow,
                   const std::vector<int>& cumCounts, int prefix) {
  const int L = static_cast<int>(cumCounts.size());
  if (static_cast<int>(receivedPerWindow.size()) != L)
    throw ConfigError("received counts length must equal layer count");
  if (prefix <= 0) return true;
  if (prefix > L) throw ConfigError("prefix out of range");
  for (int m = prefix; m <= L; ++m) {
    bool ok = true;
    int tailSum = 0;
    // j descending keeps a running suffix sum of received counts.
    for (int j = m; j >= 1; --j) {
      tailSum += receivedPerWindow[j - 1];
      const int needed = cumCounts[m - 1] - (j >= 2 ? cumCounts[j - 2] : 0);
      if (tailSum < needed) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
  }
  return false;
}

int maxDecodablePrefixByCounting(const std::vector<int>& receivedPerWindow,
                                 const std::vector<int>& cumCounts) {
  for (int l = static_cast<int>(cumCounts.size()); l >= 1; --l)
    if (hallDecodable(receivedPerWindow, cumCounts, l)) return l;
  return 0;
}

Vec estimatePrefixProbabilities(const WindowDistribution& lambda,
                                const std::vector<int>& perLayerCounts,
                                int sentCount, double erasureRate, int trials,
                                std::uint64_t seed, PrefixEstimator mode) {
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (!(erasureRate >= 0.0 && erasureRate < 1.0))
    throw ConfigError("erasure rate must lie in [0, 1)");
  if (sentCount < 0) throw ConfigError("sent count must be non-negative");
  std::vector<int> cum(perLayerCounts.size());
  int running = 0;
  for (std::size_t l = 0; l < perLayerCounts.size(); ++l) {
    running += perLayerCounts[l];
    cum[l] = running;
  }
  validateWindows(lambda, cum);

  const int L = lambda.layers();
  const std::span<const double> probs(lambda.lambda.data(),
                                      static_cast<std::size_t>(L));
  std::vector<std::int64_t> tally(L + 1, 0);
  std::vector<int> windows(sentCount);
  std::vector<std::uint8_t> received(sentCount);
  for (int t = 0; t < trials; ++t) {
    Rng rng(deriveSeed(seed, static_cast<std::uint64_t>(t)));
    std::vector<int> counts(L, 0);
    // Window and erasure draws first so both estimator modes see the same
    // survivor sets for a given seed.
    for (int s = 0; s < sentCount; ++s) {
      windows[s] = rng.categorical(probs);
      received[s] = rng.bernoulli(erasureRate) ? 0 : 1;
      if (received[s]) ++counts[windows[s]];
    }
    int prefix;
    if (mode == PrefixEstimator::Hall) {
      prefix = maxDecodablePrefixByCounting(counts, cum);
    } else {
      std::vector<std::pair<int, std::vector<std::uint8_t>>> rows;
      rows.reserve(sentCount);
      for (int s = 0; s < sentCount; ++s) {
        if (!received[s]) continue;
        const int kw = cum[windows[s]];
        std::vector<std::uint8_t> coeffs(kw);
        for (int j = 0; j < kw; ++j) coeffs[j] = rng.nextByte();
        rows.emplace_back(windows[s] + 1, std::move(coeffs));
      }
      prefix = maxDecodablePrefixByRank(rows, cum);
    }
    ++tally[prefix];
  }

  Vec p(L + 1);
  for (int l = 0; l <= L; ++l)
    p[l] = static_cast<double>(tally[l]) / static_cast<double>(trials);
  // Pin the sum to exactly 1 by absorbing rounding into the largest entry.
  Eigen::Index largest = 0;
  p.maxCoeff(&largest);
  double others = 0.0;
  for (int l = 0; l <= L; ++l)
    if (l != largest) others += p[l];
  p[largest] = 1.0 - others;
  return p;
}

std::vector<std::uint8_t> serializeSymbols(const CodedSymbolBatch& batch) {
  std::vector<std::uint8_t> out;
  for (const auto& sym : batch.symbols) {
    const std::uint16_t w = static_cast<std::uint16_t>(sym.window);
    const std::uint16_t n = static_cast<std::uint16_t>(sym.coefficients.size());
    out.push_back(static_cast<std::uint8_t>(w & 0xff));
    out.push_back(static_cast<std::uint8_t>(w >> 8));
    out.push_back(static_cast<std::uint8_t>(n & 0xff));
    out.push_back(static_cast<std::uint8_t>(n >> 8));
    out.insert(out.end(), sym.coefficients.begin(), sym.coefficients.end());
    out.insert(out.end(), sym.payload.begin(), sym.payload.end());
  }
  return out;
}

CodedSymbolBatch deserializeSymbols(const std::vector<std::uint8_t>& bytes,
                                    std::vector<int> sourceCounts,
                                    int symbolSize) {
  CodedSymbolBatch batch;
  batch.sourceCounts = std::move(sourceCounts);
  batch.symbolSize = symbolSize;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    if (bytes.size() - pos < 4)
      throw ConfigError("truncated coded-symbol stream");
    CodedSymbol sym;
    sym.window = bytes[pos] | (bytes[pos + 1] << 8);
    const int n = bytes[pos + 2] | (bytes[pos + 3] << 8);
    pos += 4;
    if (bytes.size() - pos < static_cast<std::size_t>(n) + symbolSize)
      throw ConfigError("truncated coded-symbol stream");
    sym.coefficients.assign(bytes.begin() + pos, bytes.begin() + pos + n);
    pos += n;
    sym.payload.assign(bytes.begin() + pos, bytes.begin() + pos + symbolSize);
    pos += symbolSize;
    batch.symbols.push_back(std::move(sym));
  }
  return batch;
}

}  // namespace uavsense
