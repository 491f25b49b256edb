#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>

namespace rtcsim {

/// Simulation timestamp with picosecond resolution.
///
/// All MAC arithmetic (slot boundaries, AIFS, backoff) happens on integer
/// picoseconds so that band boundaries compare exactly. Seconds are only a
/// presentation unit.
class SimTime
{
public:
  static constexpr std::int64_t kPerSecond = 1'000'000'000'000;

  constexpr SimTime () = default;

  static constexpr SimTime
  ps (std::int64_t v)
  {
    SimTime t;
    t.m_ps = v;
    return t;
  }
  static constexpr SimTime us (std::int64_t v) { return ps (v * 1'000'000); }
  static SimTime
  seconds (double s)
  {
    return ps (std::llround (s * static_cast<double> (kPerSecond)));
  }
  static constexpr SimTime max () { return ps (std::numeric_limits<std::int64_t>::max ()); }

  constexpr std::int64_t count () const { return m_ps; }
  constexpr double to_seconds () const { return static_cast<double> (m_ps) / static_cast<double> (kPerSecond); }

  constexpr auto operator<=> (const SimTime &) const = default;

  constexpr SimTime operator+ (SimTime o) const { return ps (m_ps + o.m_ps); }
  constexpr SimTime operator- (SimTime o) const { return ps (m_ps - o.m_ps); }
  constexpr SimTime operator* (std::int64_t k) const { return ps (m_ps * k); }
  constexpr SimTime &operator+= (SimTime o) { m_ps += o.m_ps; return *this; }

private:
  std::int64_t m_ps = 0;
};

} // namespace rtcsim
