#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rtcsim/geometry.hpp"
#include "rtcsim/kernels.hpp"

namespace rtcsim {

enum class PathLossKind { ThreeLogDistance, Fowlerville };

std::string_view to_string (PathLossKind kind);

/**
 * Distance-only path-loss curve.
 *
 * Both kinds share the piecewise log-distance shape: constant reference loss
 * below the first boundary, then one exponent per segment, accumulated across
 * segments so the curve is continuous. The Fowlerville kind adds a frozen
 * lognormal shadowing term: a standard normal draw per 1 m distance quantum,
 * derived from (shadowing_seed, quantum) by hashing, scaled by sigma.
 */
class PathLossModel
{
public:
  static PathLossModel three_log_distance (double d0_m, double d1_m, double d2_m, double n0,
                                           double n1, double n2, double ref_loss_db);
  static PathLossModel fowlerville (std::vector<double> boundaries_m, std::vector<double> exponents,
                                    double ref_loss_db, double shadowing_sigma_db,
                                    std::uint64_t shadowing_seed);

  /// d0=1, d1=200, d2=500 m; n = 1.9 / 3.8 / 3.8; L0 = 46.6777 dB.
  static PathLossModel default_three_log_distance ();
  /// Bundled field-profile stand-in; see config/rtcsim.ini for the values.
  static PathLossModel default_fowlerville ();

  PathLossKind kind () const { return m_kind; }
  const std::vector<double> &boundaries_m () const { return m_boundaries; }
  const std::vector<double> &exponents () const { return m_exponents; }
  double ref_loss_db () const { return m_ref_loss_db; }
  double shadowing_sigma_db () const { return m_sigma_db; }
  std::uint64_t shadowing_seed () const { return m_seed; }

  /// Attenuation at distance d (>= 0) in dB.
  double loss_db (double d_m) const;
  /// Batch form of loss_db; uses the SIMD kernels.
  void loss_db (std::span<const double> d_m, std::span<double> out) const;
  /// Shadowing contribution alone (0 when sigma is 0).
  double shadowing_db (double d_m) const;

  bool operator== (const PathLossModel &o) const;

private:
  PathLossModel () = default;
  void finish ();

  PathLossKind m_kind = PathLossKind::ThreeLogDistance;
  std::vector<double> m_boundaries;
  std::vector<double> m_exponents;
  double m_ref_loss_db = 0.0;
  double m_sigma_db = 0.0;
  std::uint64_t m_seed = 0;
  kernels::LogDistanceCurve m_curve;
};

/// Transceiver thresholds. Defaults are typical 10 MHz 802.11p figures.
struct RadioConfig
{
  double tx_power_dbm = 20.0;
  double cs_threshold_dbm = -94.0;
  double rx_sensitivity_dbm = -91.0;
  double capture_margin_db = 10.0;
  double noise_floor_dbm = -99.0;

  void validate () const;
  bool operator== (const RadioConfig &) const = default;
};

double path_loss_db (const PathLossModel &model, double d_m);
double rss_dbm (const RadioConfig &radio, const PathLossModel &model, double d_m);

/// True when a transmission from `a` arrives at `b` below the carrier-sense
/// threshold. Symmetric because the model depends on distance only.
bool is_hidden (const RadioConfig &radio, const PathLossModel &model, Point a, Point b);

struct Arrival
{
  std::size_t key = 0; ///< caller-defined identity, returned for the winner
  double rss_dbm = 0.0;
};

/// Capture decision among temporally overlapping arrivals at one receiver.
///
/// With s1 the strongest and s2 the runner-up (or the noise floor when it is
/// higher, which includes the single-arrival case), the strongest arrival is
/// decoded iff s1 >= rx_sensitivity, s1 - s2 >= capture_margin, and s1 is
/// strictly larger than every other arrival. Returns the winner's key.
/// Throws ValidationError for an empty set.
std::optional<std::size_t> resolve_capture (const RadioConfig &radio, std::span<const Arrival> arrivals);

} // namespace rtcsim
