#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace swnc {

/// Element of GF(2^8) with reduction polynomial x^8 + x^4 + x^3 + x + 1 (0x11B).
struct Gf256 {
  std::uint8_t value{0};

  constexpr Gf256() = default;
  constexpr explicit Gf256(std::uint8_t v) : value{v} {}

  constexpr bool is_zero() const noexcept { return value == 0; }
  friend constexpr bool operator==(Gf256, Gf256) = default;
};

namespace gf {

inline constexpr unsigned reduction_poly = 0x11B;

/// Carry-less multiply followed by reduction; the reference definition the
/// lookup tables are built from.
constexpr std::uint8_t mul_slow(std::uint8_t a, std::uint8_t b) noexcept {
  unsigned acc = 0;
  unsigned x = a;
  for (unsigned bit = 0; bit < 8; ++bit) {
    if (b & (1u << bit)) acc ^= x << bit;
  }
  for (int deg = 14; deg >= 8; --deg) {
    if (acc & (1u << deg)) acc ^= reduction_poly << (deg - 8);
  }
  return static_cast<std::uint8_t>(acc);
}

struct Tables {
  std::array<std::array<std::uint8_t, 256>, 256> mul{};
  std::array<std::uint8_t, 256> inv{};

  Tables() {
    for (unsigned a = 0; a < 256; ++a) {
      for (unsigned b = a; b < 256; ++b) {
        auto p = mul_slow(static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b));
        mul[a][b] = p;
        mul[b][a] = p;
      }
    }
    for (unsigned a = 1; a < 256; ++a) {
      for (unsigned b = 1; b < 256; ++b) {
        if (mul[a][b] == 1) {
          inv[a] = static_cast<std::uint8_t>(b);
          break;
        }
      }
    }
  }
};

inline const Tables& tables() {
  static const Tables t;
  return t;
}

}  // namespace gf

constexpr Gf256 gf_add(Gf256 a, Gf256 b) noexcept {
  return Gf256{static_cast<std::uint8_t>(a.value ^ b.value)};
}

inline Gf256 gf_mul(Gf256 a, Gf256 b) noexcept {
  return Gf256{gf::tables().mul[a.value][b.value]};
}

/// Throws std::domain_error for zero.
inline Gf256 gf_inv(Gf256 a) {
  if (a.is_zero()) throw std::domain_error("gf_inv: zero has no multiplicative inverse");
  return Gf256{gf::tables().inv[a.value]};
}

inline Gf256 operator+(Gf256 a, Gf256 b) noexcept { return gf_add(a, b); }
inline Gf256 operator*(Gf256 a, Gf256 b) noexcept { return gf_mul(a, b); }

/// dst[i] ^= c * src[i]
inline void gf_axpy(std::span<std::uint8_t> dst, Gf256 c, std::span<const std::uint8_t> src) {
  if (dst.size() != src.size()) throw std::invalid_argument("gf_axpy: length mismatch");
  if (c.is_zero()) return;
  if (c.value == 1) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] ^= src[i];
    return;
  }
  const auto& row = gf::tables().mul[c.value];
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] ^= row[src[i]];
}

inline void gf_scale(std::span<std::uint8_t> buf, Gf256 c) noexcept {
  const auto& row = gf::tables().mul[c.value];
  for (auto& b : buf) b = row[b];
}

}  // namespace swnc
