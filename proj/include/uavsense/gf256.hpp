#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace uavsense::gf256 {

// GF(2^8) with the AES reduction polynomial x^8 + x^4 + x^3 + x + 1 (0x11B).
// Log/exp tables use generator 0x03.

namespace detail {

constexpr std::uint8_t mulSlow(std::uint8_t a, std::uint8_t b) {
  std::uint16_t p = 0;
  std::uint16_t aa = a;
  for (int i = 0; i < 8; ++i) {
    if (b & 1) p ^= aa;
    aa <<= 1;
    if (aa & 0x100) aa ^= 0x11B;
    b >>= 1;
  }
  return static_cast<std::uint8_t>(p);
}

struct Tables {
  std::array<std::uint8_t, 510> exp{};
  std::array<std::uint8_t, 256> log{};
  std::array<std::uint8_t, 256> inv{};
};

constexpr Tables makeTables() {
  Tables t{};
  std::uint8_t x = 1;
  for (int i = 0; i < 255; ++i) {
    t.exp[i] = x;
    t.exp[i + 255] = x;
    t.log[x] = static_cast<std::uint8_t>(i);
    x = mulSlow(x, 0x03);
  }
  t.log[0] = 0;  // unused sentinel
  t.inv[0] = 0;  // inverse of 0 undefined; callers must not rely on it
  for (int a = 1; a < 256; ++a)
    t.inv[a] = t.exp[255 - t.log[a]];
  return t;
}

inline constexpr Tables kTables = makeTables();

}  // namespace detail

inline constexpr std::uint8_t add(std::uint8_t a, std::uint8_t b) {
  return a ^ b;
}

inline constexpr std::uint8_t mul(std::uint8_t a, std::uint8_t b) {
  if (a == 0 || b == 0) return 0;
  return detail::kTables.exp[detail::kTables.log[a] + detail::kTables.log[b]];
}

inline constexpr std::uint8_t inv(std::uint8_t a) {
  return detail::kTables.inv[a];
}

/// Pointer to the 256-byte row {c*0, c*1, ..., c*255} of the product table.
/// Staying on one row keeps the hot elimination loops L1-resident.
const std::uint8_t* mulRow(std::uint8_t c);

/// dst[i] ^= c * src[i] for i in [0, n)
void mulAddRow(std::uint8_t* dst, const std::uint8_t* src, std::uint8_t c,
               std::size_t n);

/// row[i] *= c
void scaleRow(std::uint8_t* row, std::uint8_t c, std::size_t n);

}  // namespace uavsense::gf256
