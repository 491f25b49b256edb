#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rtcsim/geometry.hpp"
#include "rtcsim/time.hpp"

namespace rtcsim {

enum class TopologyKind { Disk, Linear, Intersection };

std::string_view to_string (TopologyKind kind);
TopologyKind parse_topology_kind (std::string_view name);

/// Road geometry for synthetic scenarios. The HV sits at the origin unless
/// an explicit position is given; the geometry is centred on the origin.
struct TopologySpec
{
  TopologyKind kind = TopologyKind::Disk;
  double radius_m = 500.0;      ///< Disk
  double length_m = 3000.0;     ///< Linear (segment along x)
  double arm_length_m = 1500.0; ///< Intersection (two crossing roads of this length)
  std::uint32_t vehicle_count = 100; ///< includes the HV
  std::optional<Point> hv_position;

  void validate () const;
  bool operator== (const TopologySpec &) const = default;
};

struct Waypoint
{
  double time_s = 0.0;
  double x_m = 0.0;
  double y_m = 0.0;
  double speed_mps = 0.0;
  double heading_rad = 0.0;

  Point position () const { return {x_m, y_m}; }
  bool operator== (const Waypoint &) const = default;
};

struct MobilityTrace
{
  std::uint32_t vehicle_id = 0;
  std::vector<Waypoint> waypoints;
  double tx_rate_hz = 10.0;
  SimTime gen_phase; ///< offset of the first packet, in [0, 1 / tx_rate_hz)

  SimTime period () const;
  void validate () const;
  bool operator== (const MobilityTrace &) const = default;
};

struct Scenario
{
  MobilityTrace hv_trace;
  std::vector<MobilityTrace> rv_traces;
  double duration_s = 20.0;
  std::uint64_t seed = 0;

  std::size_t vehicle_count () const { return rv_traces.size () + 1; }
  void validate () const;
  bool operator== (const Scenario &) const = default;
};

/// Interpolated kinematic state. Speed and heading are taken from the
/// waypoint at or before t.
struct KinematicState
{
  Point position;
  double speed_mps = 0.0;
  double heading_rad = 0.0;
};

/// Sampling period of generated waypoints.
inline constexpr double kWaypointPeriodS = 0.1;

/// Synthetic scenario: RVs uniform over the geometry, constant speed, HV
/// static at the centre (or the explicit position). Deterministic per seed.
Scenario generate_topology (const TopologySpec &spec, double speed_mps, double duration_s,
                            std::uint64_t seed, double tx_rate_hz = 10.0);

Point position_at (const MobilityTrace &trace, double t_s);
KinematicState state_at (const MobilityTrace &trace, double t_s);

/// {gen_phase + k / tx_rate} within [0, duration), strictly increasing.
std::vector<SimTime> generation_schedule (const MobilityTrace &trace, double duration_s);

/// Reference point for projecting GPS rows to the local planar frame.
struct GeoReference
{
  double lat_deg = 0.0;
  double lon_deg = 0.0;
};

/// Local equirectangular projection about `ref`.
Point project_equirectangular (const GeoReference &ref, double lat_deg, double lon_deg);

/**
 * Parse a trace CSV (`time_s,vehicle_id,x_m,y_m,speed_mps,heading_rad`).
 *
 * The header line is optional. A `time_s,vehicle_id,lat_deg,lon_deg,...`
 * header switches to GPS rows, projected about `geo_ref` (or the first row
 * when none is given). Returns one trace per vehicle id in ascending id order
 * with waypoints sorted by time. ParseError carries the physical line number.
 */
std::vector<MobilityTrace> parse_trace_file (std::istream &in, const GeoReference *geo_ref = nullptr);
std::vector<MobilityTrace> parse_trace_file (const std::filesystem::path &path,
                                             const GeoReference *geo_ref = nullptr);

/// File name used for a vehicle's trace inside a scenario directory.
std::string trace_file_name (std::uint32_t vehicle_id);

/// Write one CSV per vehicle plus `manifest.json`. Returns the trace paths
/// (HV first). Numbers use shortest round-trip formatting.
std::vector<std::filesystem::path> write_trace_files (const Scenario &scenario,
                                                      const std::filesystem::path &directory);

/// Inverse of write_trace_files.
Scenario load_scenario (const std::filesystem::path &directory);

} // namespace rtcsim
