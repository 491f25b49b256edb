#pragma once

// Constants shared by the scalar and AVX2 log10 so both round identically.

#include <array>
#include <cstdint>

namespace rtcsim::kernels::detail {

inline constexpr double kSqrt2 = 1.4142135623730951;
inline constexpr double kLn2 = 0.6931471805599453;
inline constexpr double kInvLn10 = 0.4342944819032518;
inline constexpr std::uint64_t kMantissaMask = 0x000FFFFFFFFFFFFFULL;
inline constexpr std::uint64_t kExponentOne = 0x3FF0000000000000ULL;
// 2^52 as a double and its bit pattern; OR-ing a small integer into the low
// mantissa bits and subtracting 2^52 converts it to double exactly.
inline constexpr std::uint64_t kTwo52Bits = 0x4330000000000000ULL;
inline constexpr double kTwo52 = 4503599627370496.0;

// ln(m) = 2 s * sum_k s^(2k) / (2k + 1), s = (m - 1) / (m + 1), |s| <= 0.1716.
// Eleven terms put the truncation error below 2^-53.
inline constexpr int kTerms = 11;

constexpr std::array<double, kTerms>
make_coefficients ()
{
  std::array<double, kTerms> c{};
  for (int k = 0; k < kTerms; ++k)
    c[k] = 1.0 / static_cast<double> (2 * k + 1);
  return c;
}

inline constexpr std::array<double, kTerms> kCoef = make_coefficients ();

} // namespace rtcsim::kernels::detail
