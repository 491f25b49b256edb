#include "rtcsim/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rtcsim/errors.hpp"
#include "rtcsim/rng.hpp"

namespace rtcsim {

namespace {

void
require (bool ok, const char *what)
{
  if (!ok)
    throw ValidationError (what);
}

bool
finite (double v)
{
  return std::isfinite (v);
}

// Standard normal for one shadowing quantum via Box-Muller on two hashed uniforms.
double
quantum_normal (std::uint64_t seed, std::int64_t quantum)
{
  const std::uint64_t h1 = mix64 (seed ^ mix64 (static_cast<std::uint64_t> (quantum)));
  const std::uint64_t h2 = mix64 (h1);
  const double u1 = static_cast<double> ((h1 >> 11) + 1) * 0x1.0p-53; // (0, 1]
  const double u2 = static_cast<double> (h2 >> 11) * 0x1.0p-53;       // [0, 1)
  return std::sqrt (-2.0 * std::log (u1)) * std::cos (2.0 * std::numbers::pi * u2);
}

} // namespace

std::string_view
to_string (PathLossKind kind)
{
  return kind == PathLossKind::Fowlerville ? "fowlerville" : "three_log_distance";
}

PathLossModel
PathLossModel::three_log_distance (double d0_m, double d1_m, double d2_m, double n0, double n1,
                                   double n2, double ref_loss_db)
{
  require (finite (d0_m) && finite (d1_m) && finite (d2_m), "three-log-distance: boundaries must be finite");
  require (0.0 < d0_m && d0_m < d1_m && d1_m < d2_m, "three-log-distance: need 0 < d0 < d1 < d2");
  PathLossModel m;
  m.m_kind = PathLossKind::ThreeLogDistance;
  m.m_boundaries = {d0_m, d1_m, d2_m};
  m.m_exponents = {n0, n1, n2};
  m.m_ref_loss_db = ref_loss_db;
  m.finish ();
  return m;
}

PathLossModel
PathLossModel::fowlerville (std::vector<double> boundaries_m, std::vector<double> exponents,
                            double ref_loss_db, double shadowing_sigma_db, std::uint64_t shadowing_seed)
{
  require (!boundaries_m.empty (), "fowlerville: at least one boundary required");
  require (boundaries_m.size () == exponents.size (), "fowlerville: one exponent per boundary");
  require (boundaries_m.front () > 0.0, "fowlerville: boundaries must be positive");
  for (std::size_t i = 0; i < boundaries_m.size (); ++i)
    {
      require (finite (boundaries_m[i]), "fowlerville: boundaries must be finite");
      if (i > 0)
        require (boundaries_m[i - 1] < boundaries_m[i], "fowlerville: boundaries must increase strictly");
    }
  require (finite (shadowing_sigma_db) && shadowing_sigma_db >= 0.0, "fowlerville: sigma must be >= 0");
  PathLossModel m;
  m.m_kind = PathLossKind::Fowlerville;
  m.m_boundaries = std::move (boundaries_m);
  m.m_exponents = std::move (exponents);
  m.m_ref_loss_db = ref_loss_db;
  m.m_sigma_db = shadowing_sigma_db;
  m.m_seed = shadowing_seed;
  m.finish ();
  return m;
}

void
PathLossModel::finish ()
{
  for (double n : m_exponents)
    require (finite (n) && n >= 0.0, "path loss: exponents must be >= 0");
  require (finite (m_ref_loss_db) && m_ref_loss_db >= 0.0, "path loss: reference loss must be >= 0");
  m_curve = kernels::LogDistanceCurve::from_segments (m_ref_loss_db, m_boundaries, m_exponents);
}

PathLossModel
PathLossModel::default_three_log_distance ()
{
  return three_log_distance (1.0, 200.0, 500.0, 1.9, 3.8, 3.8, 46.6777);
}

PathLossModel
PathLossModel::default_fowlerville ()
{
  return fowlerville ({1.0, 80.0, 400.0}, {1.8, 2.5, 3.0}, 47.86, 3.0, 1);
}

double
PathLossModel::shadowing_db (double d_m) const
{
  if (m_sigma_db == 0.0)
    return 0.0;
  const auto quantum = static_cast<std::int64_t> (std::floor (d_m));
  return m_sigma_db * quantum_normal (m_seed, quantum);
}

double
PathLossModel::loss_db (double d_m) const
{
  if (!(d_m >= 0.0) || !finite (d_m))
    throw ValidationError ("path loss: distance must be finite and >= 0");
  double out = 0.0;
  kernels::scalar::path_loss (m_curve, std::span<const double> (&d_m, 1), std::span<double> (&out, 1));
  return out + shadowing_db (d_m);
}

void
PathLossModel::loss_db (std::span<const double> d_m, std::span<double> out) const
{
  for (double d : d_m)
    if (!(d >= 0.0) || !finite (d))
      throw ValidationError ("path loss: distance must be finite and >= 0");
  kernels::path_loss (m_curve, d_m, out);
  if (m_sigma_db != 0.0)
    for (std::size_t i = 0; i < d_m.size (); ++i)
      out[i] += shadowing_db (d_m[i]);
}

bool
PathLossModel::operator== (const PathLossModel &o) const
{
  return m_kind == o.m_kind && m_boundaries == o.m_boundaries && m_exponents == o.m_exponents
         && m_ref_loss_db == o.m_ref_loss_db && m_sigma_db == o.m_sigma_db && m_seed == o.m_seed;
}

void
RadioConfig::validate () const
{
  require (finite (tx_power_dbm) && finite (cs_threshold_dbm) && finite (rx_sensitivity_dbm)
               && finite (capture_margin_db) && finite (noise_floor_dbm),
           "radio: all thresholds must be finite");
  require (rx_sensitivity_dbm >= cs_threshold_dbm, "radio: rx_sensitivity must be >= cs_threshold");
  require (capture_margin_db >= 0.0, "radio: capture_margin must be >= 0");
}

double
path_loss_db (const PathLossModel &model, double d_m)
{
  return model.loss_db (d_m);
}

double
rss_dbm (const RadioConfig &radio, const PathLossModel &model, double d_m)
{
  return radio.tx_power_dbm - model.loss_db (d_m);
}

bool
is_hidden (const RadioConfig &radio, const PathLossModel &model, Point a, Point b)
{
  return rss_dbm (radio, model, distance (a, b)) < radio.cs_threshold_dbm;
}

std::optional<std::size_t>
resolve_capture (const RadioConfig &radio, std::span<const Arrival> arrivals)
{
  if (arrivals.empty ())
    throw ValidationError ("resolve_capture: no arrivals");
  std::size_t best = 0;
  for (std::size_t i = 1; i < arrivals.size (); ++i)
    if (arrivals[i].rss_dbm > arrivals[best].rss_dbm)
      best = i;
  double second = radio.noise_floor_dbm;
  for (std::size_t i = 0; i < arrivals.size (); ++i)
    {
      if (i == best)
        continue;
      if (arrivals[i].rss_dbm == arrivals[best].rss_dbm)
        return std::nullopt; // exact tie: mutual destruction
      second = std::max (second, arrivals[i].rss_dbm);
    }
  const double s1 = arrivals[best].rss_dbm;
  if (s1 >= radio.rx_sensitivity_dbm && s1 - second >= radio.capture_margin_db)
    return arrivals[best].key;
  return std::nullopt;
}

} // namespace rtcsim
