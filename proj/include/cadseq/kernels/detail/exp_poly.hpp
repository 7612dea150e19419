#pragma once

#include <bit>
#include <cmath>
#include <cstdint>

// Shared polynomial exp(x) scheme for f32 (Cephes-style). The scalar path
// mirrors the AVX2 instruction sequence exactly (fma for fma, floor for
// floor) so both variants produce bit-identical results.

namespace cadseq::kernels::detail {

inline constexpr float kExpClampHi = 88.0f;
inline constexpr float kExpClampLo = -87.0f;
inline constexpr float kLog2e = 1.44269504088896341f;
inline constexpr float kExpC1 = 0.693359375f;
inline constexpr float kExpC2 = -2.12194440e-4f;
inline constexpr float kExpP0 = 1.9875691500e-4f;
inline constexpr float kExpP1 = 1.3981999507e-3f;
inline constexpr float kExpP2 = 8.3334519073e-3f;
inline constexpr float kExpP3 = 4.1665795894e-2f;
inline constexpr float kExpP4 = 1.6666665459e-1f;
inline constexpr float kExpP5 = 5.0000001201e-1f;

inline float exp_poly_scalar(float x) {
  x = x < kExpClampLo ? kExpClampLo : (x > kExpClampHi ? kExpClampHi : x);
  const float n = std::floor(std::fma(x, kLog2e, 0.5f));
  float r = std::fma(-n, kExpC1, x);
  r = std::fma(-n, kExpC2, r);
  float p = kExpP0;
  p = std::fma(p, r, kExpP1);
  p = std::fma(p, r, kExpP2);
  p = std::fma(p, r, kExpP3);
  p = std::fma(p, r, kExpP4);
  p = std::fma(p, r, kExpP5);
  p = std::fma(p, r * r, r) + 1.0f;
  const std::int32_t e = (static_cast<std::int32_t>(n) + 127) << 23;
  return p * std::bit_cast<float>(e);
}

}  // namespace cadseq::kernels::detail
