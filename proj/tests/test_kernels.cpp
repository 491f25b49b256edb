#include "doctest.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <vector>

#include "rtcsim/kernels.hpp"
#include "rtcsim/rng.hpp"

using namespace rtcsim;
using namespace rtcsim::kernels;

namespace {

bool
same_bits (double a, double b)
{
  return std::memcmp (&a, &b, sizeof a) == 0;
}

std::vector<double>
distances (std::size_t n, std::uint64_t seed)
{
  Rng rng (seed);
  std::vector<double> d (n);
  for (auto &v : d)
    {
      // spread over many decades, with exact breakpoints and zero mixed in
      const auto pick = rng.uniform_int (0, 9);
      if (pick == 0)
        v = 0.0;
      else if (pick == 1)
        v = std::array<double, 4>{1.0, 80.0, 200.0, 400.0}[rng.uniform_int (0, 3)];
      else
        v = std::pow (10.0, rng.uniform (-3.0, 5.0));
    }
  return d;
}

const LogDistanceCurve &
curve ()
{
  static const double b[] = {1.0, 80.0, 400.0};
  static const double n[] = {1.8, 2.5, 3.0};
  static const LogDistanceCurve c = LogDistanceCurve::from_segments (47.86, b, n);
  return c;
}

} // namespace

TEST_CASE ("log10_ref tracks std::log10")
{
  Rng rng (5);
  for (int i = 0; i < 100000; ++i)
    {
      const double x = std::pow (10.0, rng.uniform (-300.0, 300.0));
      const double ref = std::log10 (x);
      CHECK (std::abs (log10_ref (x) - ref) <= 4.0 * std::numeric_limits<double>::epsilon () * std::max (1.0, std::abs (ref)));
    }
  CHECK (log10_ref (1.0) == 0.0);
  CHECK (log10_ref (10.0) == doctest::Approx (1.0).epsilon (1e-15));
}

TEST_CASE ("scalar path loss matches the closed form")
{
  const std::vector<double> d = distances (5000, 1);
  std::vector<double> out (d.size ());
  scalar::path_loss (curve (), d, out);
  for (std::size_t i = 0; i < d.size (); ++i)
    {
      double want = 47.86;
      const double x = d[i];
      if (x > 1.0)
        want += 18.0 * std::log10 (std::min (x, 80.0));
      if (x > 80.0)
        want += 25.0 * std::log10 (std::min (x, 400.0) / 80.0);
      if (x > 400.0)
        want += 30.0 * std::log10 (x / 400.0);
      CHECK (std::abs ((out[i]) - (want)) <= 1e-9);
    }
}

TEST_CASE ("scalar distance")
{
  const std::vector<double> ax{0.0, 3.0, -1.0}, ay{0.0, 4.0, -1.0}, bx{3.0, 0.0, -1.0}, by{4.0, 0.0, -1.0};
  std::vector<double> out (3);
  scalar::distance (ax, ay, bx, by, out);
  CHECK (out[0] == 5.0);
  CHECK (out[1] == 5.0);
  CHECK (out[2] == 0.0);
}

TEST_CASE ("AVX2 kernels are bit-identical to the scalar reference")
{
  if (!avx2_available ())
    {
      MESSAGE ("AVX2 not available on this machine; equivalence not exercised");
      return;
    }
  // every tail length around the 4-lane width
  for (std::size_t n = 0; n <= 37; ++n)
    {
      const std::vector<double> d = distances (n, 100 + n);
      std::vector<double> s (n), v (n);
      scalar::path_loss (curve (), d, s);
      avx2::path_loss (curve (), d, v);
      for (std::size_t i = 0; i < n; ++i)
        CHECK (same_bits (s[i], v[i]));
    }

  const std::vector<double> d = distances (200000, 9);
  std::vector<double> s (d.size ()), v (d.size ());
  scalar::path_loss (curve (), d, s);
  avx2::path_loss (curve (), d, v);
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < d.size (); ++i)
    mismatches += !same_bits (s[i], v[i]);
  CHECK (mismatches == 0);

  Rng rng (77);
  const std::size_t n = 10003;
  std::vector<double> ax (n), ay (n), bx (n), by (n), ds (n), dv (n);
  for (std::size_t i = 0; i < n; ++i)
    {
      ax[i] = rng.uniform (-2000, 2000);
      ay[i] = rng.uniform (-2000, 2000);
      bx[i] = rng.uniform (-2000, 2000);
      by[i] = rng.uniform (-2000, 2000);
    }
  scalar::distance (ax, ay, bx, by, ds);
  avx2::distance (ax, ay, bx, by, dv);
  for (std::size_t i = 0; i < n; ++i)
    CHECK (same_bits (ds[i], dv[i]));
}

TEST_CASE ("dispatch honours the forced ISA")
{
  const std::vector<double> d = distances (1000, 3);
  std::vector<double> a (d.size ()), b (d.size ());
  set_isa (Isa::Scalar);
  CHECK (active_isa () == Isa::Scalar);
  path_loss (curve (), d, a);
  if (avx2_available ())
    {
      set_isa (Isa::Avx2);
      CHECK (active_isa () == Isa::Avx2);
    }
  path_loss (curve (), d, b);
  for (std::size_t i = 0; i < d.size (); ++i)
    CHECK (same_bits (a[i], b[i]));
  set_isa (std::nullopt);
  CHECK (isa_name (Isa::Scalar) == "scalar");
}
