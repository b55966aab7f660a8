#include "uavsense/gf256.hpp"

namespace uavsense::gf256 {

namespace {

struct MulTable {
  // 64 KiB full product table, built once at startup.
  std::uint8_t rows[256][256];
  MulTable() {
    for (int a = 0; a < 256; ++a)
      for (int b = 0; b < 256; ++b)
        rows[a][b] = mul(static_cast<std::uint8_t>(a),
                         static_cast<std::uint8_t>(b));
  }
};

const MulTable& table() {
  static const MulTable t;
  return t;
}

}  // namespace

const std::uint8_t* mulRow(std::uint8_t c) { return table().rows[c]; }

void mulAddRow(std::uint8_t* dst, const std::uint8_t* src, std::uint8_t c,
               std::size_t n) {
  if (c == 0) return;
  if (c == 1) {
    for (std::size_t i = 0; i < n; ++i) dst[i] ^= src[i];
    return;
  }
  const std::uint8_t* row = mulRow(c);
  for (std::size_t i = 0; i < n; ++i) dst[i] ^= row[src[i]];
}

void scaleRow(std::uint8_t* row, std::uint8_t c, std::size_t n) {
  if (c == 1) return;
  const std::uint8_t* r = mulRow(c);
  for (std::size_t i = 0; i < n; ++i) row[i] = r[row[i]];
}

}  // namespace uavsense::gf256
