#pragma once

#include <cmath>

namespace rtcsim {

/// Planar position in meters (local frame).
struct Point
{
  double x_m = 0.0;
  double y_m = 0.0;

  bool operator== (const Point &) const = default;
};

inline double
distance (Point a, Point b)
{
  const double dx = a.x_m - b.x_m;
  const double dy = a.y_m - b.y_m;
  return std::sqrt (dx * dx + dy * dy);
}

} // namespace rtcsim
