#include "doctest.h"

#include <cmath>
#include <vector>

#include "rtcsim/channel.hpp"
#include "rtcsim/errors.hpp"

using namespace rtcsim;

namespace {

// Default three-log-distance curve written out by hand.
double
t_loss (double d)
{
  const double l0 = 46.6777;
  if (d <= 1.0)
    return l0;
  if (d <= 200.0)
    return l0 + 19.0 * std::log10 (d);
  if (d <= 500.0)
    return l0 + 19.0 * std::log10 (200.0) + 38.0 * std::log10 (d / 200.0);
  return l0 + 19.0 * std::log10 (200.0) + 38.0 * std::log10 (500.0 / 200.0) + 38.0 * std::log10 (d / 500.0);
}

} // namespace

TEST_CASE ("three-log-distance loss matches the piecewise closed form")
{
  const PathLossModel m = PathLossModel::default_three_log_distance ();
  for (double d : {0.0, 0.5, 1.0, 2.0, 10.0, 100.0, 199.9, 200.0, 200.1, 350.0, 500.0, 501.0, 1000.0, 5000.0})
    CHECK (std::abs ((m.loss_db (d)) - (t_loss (d))) <= 1e-9);
  const RadioConfig radio;
  CHECK (std::abs ((rss_dbm (radio, m, 100.0)) - (20.0 - t_loss (100.0))) <= 1e-9);
}

TEST_CASE ("loss is continuous at breakpoints and non-decreasing without shadowing")
{
  const PathLossModel m = PathLossModel::fowlerville ({1.0, 80.0, 400.0}, {1.8, 2.5, 3.0}, 47.86, 0.0, 1);
  for (double b : {1.0, 80.0, 400.0})
    CHECK (std::abs (m.loss_db (b * (1 + 1e-12)) - m.loss_db (b)) < 1e-9);
  double prev = m.loss_db (0.0);
  for (double d = 0.25; d < 2000.0; d += 0.25)
    {
      const double l = m.loss_db (d);
      CHECK (l >= prev);
      prev = l;
    }
  // 10 * n per decade inside a segment
  CHECK (m.loss_db (800.0) - m.loss_db (400.0) == doctest::Approx (30.0 * std::log10 (2.0)));
}

TEST_CASE ("shadowing is a frozen function of distance and seed")
{
  const PathLossModel a = PathLossModel::fowlerville ({1.0, 80.0, 400.0}, {1.8, 2.5, 3.0}, 47.86, 3.0, 1);
  const PathLossModel b = PathLossModel::fowlerville ({1.0, 80.0, 400.0}, {1.8, 2.5, 3.0}, 47.86, 3.0, 1);
  const PathLossModel c = PathLossModel::fowlerville ({1.0, 80.0, 400.0}, {1.8, 2.5, 3.0}, 47.86, 3.0, 2);
  int differ = 0;
  double sum = 0.0, sum2 = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i)
    {
      const double d = 1.0 + i;
      CHECK (a.loss_db (d) == b.loss_db (d));
      differ += a.shadowing_db (d) != c.shadowing_db (d);
      sum += a.shadowing_db (d);
      sum2 += a.shadowing_db (d) * a.shadowing_db (d);
    }
  CHECK (differ > n / 2);
  // one draw per metre: same value inside a quantum
  CHECK (a.shadowing_db (10.2) == a.shadowing_db (10.9));
  const double mean = sum / n;
  const double sd = std::sqrt (sum2 / n - mean * mean);
  CHECK (std::abs (mean) < 0.1);
  CHECK (sd == doctest::Approx (3.0).epsilon (0.05));
}

TEST_CASE ("batch and point loss agree")
{
  const PathLossModel m = PathLossModel::default_fowlerville ();
  std::vector<double> d, out (3000);
  for (int i = 0; i < 3000; ++i)
    d.push_back (0.37 * i);
  m.loss_db (d, out);
  for (std::size_t i = 0; i < d.size (); ++i)
    CHECK (out[i] == m.loss_db (d[i]));
}

TEST_CASE ("invalid models and inputs are rejected")
{
  CHECK_THROWS_AS (PathLossModel::three_log_distance (1, 1, 500, 1.9, 3.8, 3.8, 46), ValidationError);
  CHECK_THROWS_AS (PathLossModel::three_log_distance (1, 200, 500, -1, 3.8, 3.8, 46), ValidationError);
  CHECK_THROWS_AS (PathLossModel::three_log_distance (1, 200, 500, 1.9, 3.8, 3.8, -1), ValidationError);
  CHECK_THROWS_AS (PathLossModel::fowlerville ({1, 80}, {2}, 40, 0, 1), ValidationError);
  CHECK_THROWS_AS (PathLossModel::fowlerville ({1, 80}, {2, 3}, 40, -1, 1), ValidationError);
  CHECK_THROWS_AS (PathLossModel::fowlerville ({80, 1}, {2, 3}, 40, 0, 1), ValidationError);
  CHECK_THROWS_AS (PathLossModel::default_three_log_distance ().loss_db (-1.0), ValidationError);
  CHECK_THROWS_AS (PathLossModel::default_three_log_distance ().loss_db (NAN), ValidationError);
  RadioConfig r;
  r.rx_sensitivity_dbm = -100.0;
  CHECK_THROWS_AS (r.validate (), ValidationError);
}

TEST_CASE ("hidden-node predicate")
{
  const PathLossModel m = PathLossModel::default_three_log_distance ();
  const RadioConfig radio;
  CHECK_FALSE (is_hidden (radio, m, {0, 0}, {0, 0}));
  // 800 m: -93.3 dBm, still sensed; 1000 m: -97.0 dBm, hidden
  CHECK_FALSE (is_hidden (radio, m, {0, 0}, {800, 0}));
  CHECK (is_hidden (radio, m, {0, 0}, {1000, 0}));
  CHECK (is_hidden (radio, m, {1000, 0}, {0, 0}));
  // threshold distance located by bisection on the closed form
  double lo = 800.0, hi = 1000.0;
  for (int i = 0; i < 60; ++i)
    {
      const double mid = (lo + hi) / 2;
      (20.0 - t_loss (mid) < -94.0 ? hi : lo) = mid;
    }
  CHECK_FALSE (is_hidden (radio, m, {0, 0}, {lo - 1e-6, 0}));
  CHECK (is_hidden (radio, m, {0, 0}, {hi + 1e-6, 0}));
}

TEST_CASE ("capture decisions")
{
  const RadioConfig radio;
  const PathLossModel m = PathLossModel::default_three_log_distance ();
  CHECK_THROWS_AS (resolve_capture (radio, {}), ValidationError);

  SUBCASE ("single strong arrival")
  {
    const Arrival a[] = {{7, rss_dbm (radio, m, 10.0)}};
    CHECK (resolve_capture (radio, a) == 7u);
  }
  SUBCASE ("equal power destroys both")
  {
    const Arrival a[] = {{1, -60.0}, {2, -60.0}};
    CHECK_FALSE (resolve_capture (radio, a).has_value ());
  }
  SUBCASE ("50 m against 400 m clears the margin")
  {
    const double near = rss_dbm (radio, m, 50.0);
    const double far = rss_dbm (radio, m, 400.0);
    REQUIRE (near - far > 10.0);
    const Arrival a[] = {{1, far}, {2, near}};
    CHECK (resolve_capture (radio, a) == 2u);
  }
  SUBCASE ("margin is inclusive")
  {
    const Arrival ok[] = {{1, -60.0}, {2, -70.0}};
    CHECK (resolve_capture (radio, ok) == 1u);
    const Arrival close[] = {{1, -60.0}, {2, -69.5}};
    CHECK_FALSE (resolve_capture (radio, close).has_value ());
  }
  SUBCASE ("below sensitivity")
  {
    const Arrival a[] = {{1, -92.0}};
    CHECK_FALSE (resolve_capture (radio, a).has_value ());
  }
  SUBCASE ("a lone arrival still needs the margin over noise")
  {
    const Arrival weak[] = {{1, -90.0}};
    CHECK_FALSE (resolve_capture (radio, weak).has_value ());
    const Arrival fine[] = {{1, -89.0}};
    CHECK (resolve_capture (radio, fine) == 1u);
  }
  SUBCASE ("a runner-up under the noise floor counts as noise")
  {
    const Arrival a[] = {{1, -88.0}, {2, -120.0}};
    CHECK (resolve_capture (radio, a) == 1u);
  }
}
