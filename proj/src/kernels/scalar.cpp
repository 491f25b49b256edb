#include "rtcsim/kernels.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "log_poly.hpp"

namespace rtcsim::kernels {

using namespace detail;

double
log10_ref (double x)
{
  const auto bits = std::bit_cast<std::uint64_t> (x);
  double e = std::bit_cast<double> (kTwo52Bits | ((bits >> 52) & 0x7FF)) - kTwo52;
  e = e - 1023.0;
  double m = std::bit_cast<double> ((bits & kMantissaMask) | kExponentOne);
  if (m > kSqrt2)
    {
      m = m * 0.5;
      e = e + 1.0;
    }
  const double s = (m - 1.0) / (m + 1.0);
  const double z = s * s;
  double p = kCoef[kTerms - 1];
  for (int k = kTerms - 2; k >= 0; --k)
    p = p * z + kCoef[k];
  const double ln_m = (s + s) * p;
  const double ln_x = e * kLn2 + ln_m;
  return ln_x * kInvLn10;
}

LogDistanceCurve
LogDistanceCurve::from_segments (double ref_loss_db, std::span<const double> boundaries_m,
                                 std::span<const double> exponents)
{
  if (boundaries_m.size () != exponents.size () || boundaries_m.empty ())
    throw std::invalid_argument ("log-distance curve needs one exponent per boundary");
  LogDistanceCurve c;
  c.ref_loss_db = ref_loss_db;
  for (std::size_t k = 0; k < boundaries_m.size (); ++k)
    {
      c.log_bound.push_back (log10_ref (boundaries_m[k]));
      c.coef_db.push_back (10.0 * exponents[k]);
    }
  return c;
}

namespace scalar {

void
path_loss (const LogDistanceCurve &curve, std::span<const double> d, std::span<double> out)
{
  const std::size_t segments = curve.log_bound.size ();
  constexpr double inf = std::numeric_limits<double>::infinity ();
  for (std::size_t i = 0; i < d.size (); ++i)
    {
      const double ld = log10_ref (d[i]);
      double acc = curve.ref_loss_db;
      for (std::size_t k = 0; k < segments; ++k)
        {
          const double hi = k + 1 < segments ? curve.log_bound[k + 1] : inf;
          double t = std::min (ld, hi) - curve.log_bound[k];
          t = std::max (t, 0.0);
          acc = acc + curve.coef_db[k] * t;
        }
      out[i] = acc;
    }
}

void
distance (std::span<const double> ax, std::span<const double> ay, std::span<const double> bx,
          std::span<const double> by, std::span<double> out)
{
  for (std::size_t i = 0; i < out.size (); ++i)
    {
      const double dx = ax[i] - bx[i];
      const double dy = ay[i] - by[i];
      out[i] = std::sqrt (dx * dx + dy * dy);
    }
}

} // namespace scalar
} // namespace rtcsim::kernels
