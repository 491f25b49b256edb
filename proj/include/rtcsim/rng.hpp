#pragma once

#include <cstdint>
#include <random>

namespace rtcsim {

/// Run-level random source.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The mappings to ranges below are implemented here rather than
/// through <random> distributions, which are implementation-defined, so a
/// seed reproduces the same event log with any conforming toolchain.
class Rng
{
public:
  explicit Rng (std::uint64_t seed) : m_engine (seed) {}

  std::uint64_t next_u64 () { return m_engine (); }

  /// Uniform in [0, 1) with 53 random bits.
  double
  uniform01 ()
  {
    return static_cast<double> (next_u64 () >> 11) * 0x1.0p-53;
  }

  double uniform (double lo, double hi) { return lo + (hi - lo) * uniform01 (); }

  /// Uniform integer in [lo, hi] (inclusive), unbiased by rejection.
  std::uint64_t
  uniform_int (std::uint64_t lo, std::uint64_t hi)
  {
    const std::uint64_t span = hi - lo;
    if (span == ~std::uint64_t{0})
      return next_u64 ();
    const std::uint64_t range = span + 1;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % range);
    std::uint64_t x;
    do
      x = next_u64 ();
    while (x >= limit);
    return lo + x % range;
  }

private:
  std::mt19937_64 m_engine;
};

/// SplitMix64 finaliser; a stateless 64-bit mixing function.
constexpr std::uint64_t
mix64 (std::uint64_t x)
{
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

} // namespace rtcsim
