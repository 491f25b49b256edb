#include "rtcsim/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include "json.hpp"

#include "rtcsim/errors.hpp"
#include "rtcsim/rng.hpp"

namespace rtcsim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kEarthRadiusM = 6'371'008.8;

double
wrap_heading (double h)
{
  h = std::fmod (h, kTwoPi);
  if (h < 0.0)
    h += kTwoPi;
  if (h >= kTwoPi)
    h = 0.0;
  return h;
}

SimTime
period_of (double tx_rate_hz)
{
  return SimTime::ps (std::llround (static_cast<double> (SimTime::kPerSecond) / tx_rate_hz));
}

// Position along a segment of length `len` for a vehicle that starts at s0
// and moves with signed speed v, reflecting elastically at both ends.
struct Folded
{
  double s;
  bool forward;
};

Folded
fold (double s0, double v, double t, double len)
{
  double m = std::fmod (s0 + v * t, 2.0 * len);
  if (m < 0.0)
    m += 2.0 * len;
  if (m <= len)
    return {m, v >= 0.0};
  return {2.0 * len - m, v < 0.0};
}

std::vector<double>
sample_times (double duration_s)
{
  auto k_last = static_cast<long> (std::ceil (duration_s / kWaypointPeriodS - 1e-9));
  if (static_cast<double> (k_last) * kWaypointPeriodS < duration_s)
    ++k_last;
  std::vector<double> times;
  times.reserve (static_cast<std::size_t> (k_last) + 1);
  for (long k = 0; k <= k_last; ++k)
    times.push_back (static_cast<double> (k) * kWaypointPeriodS);
  return times;
}

} // namespace

std::string_view
to_string (TopologyKind kind)
{
  switch (kind)
    {
    case TopologyKind::Disk:
      return "disk";
    case TopologyKind::Linear:
      return "linear";
    case TopologyKind::Intersection:
      return "intersection";
    }
  return "disk";
}

TopologyKind
parse_topology_kind (std::string_view name)
{
  if (name == "disk")
    return TopologyKind::Disk;
  if (name == "linear")
    return TopologyKind::Linear;
  if (name == "intersection")
    return TopologyKind::Intersection;
  throw ValidationError ("unknown topology '" + std::string (name) + "'");
}

void
TopologySpec::validate () const
{
  if (vehicle_count < 1)
    throw ValidationError ("topology: vehicle_count must be >= 1");
  switch (kind)
    {
    case TopologyKind::Disk:
      if (!(radius_m > 0.0) || !std::isfinite (radius_m))
        throw ValidationError ("topology: disk radius must be > 0");
      break;
    case TopologyKind::Linear:
      if (!(length_m > 0.0) || !std::isfinite (length_m))
        throw ValidationError ("topology: linear length must be > 0");
      break;
    case TopologyKind::Intersection:
      if (!(arm_length_m > 0.0) || !std::isfinite (arm_length_m))
        throw ValidationError ("topology: intersection arm length must be > 0");
      break;
    }
}

SimTime
MobilityTrace::period () const
{
  return period_of (tx_rate_hz);
}

void
MobilityTrace::validate () const
{
  const std::string who = "trace " + std::to_string (vehicle_id) + ": ";
  if (waypoints.empty ())
    throw ValidationError (who + "no waypoints");
  if (!(tx_rate_hz > 0.0) || !std::isfinite (tx_rate_hz))
    throw ValidationError (who + "tx_rate_hz must be > 0");
  if (gen_phase < SimTime{} || gen_phase >= period ())
    throw ValidationError (who + "gen_phase must lie in [0, 1/tx_rate)");
  for (std::size_t i = 0; i < waypoints.size (); ++i)
    {
      const Waypoint &w = waypoints[i];
      if (!std::isfinite (w.time_s) || !std::isfinite (w.x_m) || !std::isfinite (w.y_m)
          || !std::isfinite (w.speed_mps) || !std::isfinite (w.heading_rad))
        throw ValidationError (who + "non-finite waypoint field");
      if (w.time_s < 0.0 || w.speed_mps < 0.0)
        throw ValidationError (who + "negative time or speed");
      if (w.heading_rad < 0.0 || w.heading_rad >= kTwoPi)
        throw ValidationError (who + "heading outside [0, 2pi)");
      if (i > 0 && !(waypoints[i - 1].time_s < w.time_s))
        throw ValidationError (who + "waypoint times must increase strictly");
    }
}

void
Scenario::validate () const
{
  if (!(duration_s > 0.0) || !std::isfinite (duration_s))
    throw ValidationError ("scenario: duration must be > 0");
  hv_trace.validate ();
  std::set<std::uint32_t> ids{hv_trace.vehicle_id};
  for (const auto &t : rv_traces)
    {
      t.validate ();
      if (!ids.insert (t.vehicle_id).second)
        throw ValidationError ("scenario: duplicate vehicle id " + std::to_string (t.vehicle_id));
    }
}

Scenario
generate_topology (const TopologySpec &spec, double speed_mps, double duration_s, std::uint64_t seed,
                   double tx_rate_hz)
{
  spec.validate ();
  if (!(speed_mps >= 0.0) || !std::isfinite (speed_mps))
    throw ValidationError ("generate_topology: speed must be >= 0");
  if (!(duration_s > 0.0) || !std::isfinite (duration_s))
    throw ValidationError ("generate_topology: duration must be > 0");
  if (!(tx_rate_hz > 0.0) || !std::isfinite (tx_rate_hz))
    throw ValidationError ("generate_topology: tx rate must be > 0");

  Rng rng (seed);
  const SimTime period = period_of (tx_rate_hz);
  auto draw_phase = [&] {
    return SimTime::ps (static_cast<std::int64_t> (rng.uniform_int (0, static_cast<std::uint64_t> (period.count () - 1))));
  };
  const std::vector<double> times = sample_times (duration_s);

  Scenario sc;
  sc.duration_s = duration_s;
  sc.seed = seed;

  const Point hv = spec.hv_position.value_or (Point{});
  sc.hv_trace.vehicle_id = 0;
  sc.hv_trace.tx_rate_hz = tx_rate_hz;
  sc.hv_trace.gen_phase = draw_phase ();
  for (double t : times)
    sc.hv_trace.waypoints.push_back ({t, hv.x_m, hv.y_m, 0.0, 0.0});

  for (std::uint32_t id = 1; id < spec.vehicle_count; ++id)
    {
      MobilityTrace tr;
      tr.vehicle_id = id;
      tr.tx_rate_hz = tx_rate_hz;
      tr.waypoints.reserve (times.size ());

      switch (spec.kind)
        {
        case TopologyKind::Disk:
          {
            // sqrt of a uniform gives a radius uniform over the disk area
            const double r = spec.radius_m * std::sqrt (rng.uniform01 ());
            const double theta = kTwoPi * rng.uniform01 ();
            const double dir = rng.uniform01 () < 0.5 ? 1.0 : -1.0;
            const double omega = dir * speed_mps / std::max (r, 1.0);
            for (double t : times)
              {
                const double a = theta + omega * t;
                tr.waypoints.push_back ({t, r * std::cos (a), r * std::sin (a), std::abs (omega) * r,
                                         wrap_heading (a + dir * std::numbers::pi / 2.0)});
              }
            break;
          }
        case TopologyKind::Linear:
          {
            const double len = spec.length_m;
            const double s0 = len * rng.uniform01 ();
            const double v = rng.uniform01 () < 0.5 ? speed_mps : -speed_mps;
            for (double t : times)
              {
                const Folded f = fold (s0, v, t, len);
                tr.waypoints.push_back ({t, -len / 2.0 + f.s, 0.0, speed_mps, f.forward ? 0.0 : std::numbers::pi});
              }
            break;
          }
        case TopologyKind::Intersection:
          {
            const double len = spec.arm_length_m;
            const bool vertical = rng.uniform01 () >= 0.5;
            const double s0 = len * rng.uniform01 ();
            const double v = rng.uniform01 () < 0.5 ? speed_mps : -speed_mps;
            for (double t : times)
              {
                const Folded f = fold (s0, v, t, len);
                const double along = -len / 2.0 + f.s;
                if (vertical)
                  tr.waypoints.push_back ({t, 0.0, along, speed_mps,
                                           f.forward ? std::numbers::pi / 2.0 : 3.0 * std::numbers::pi / 2.0});
                else
                  tr.waypoints.push_back ({t, along, 0.0, speed_mps, f.forward ? 0.0 : std::numbers::pi});
              }
            break;
          }
        }
      tr.gen_phase = draw_phase ();
      sc.rv_traces.push_back (std::move (tr));
    }
  return sc;
}

KinematicState
state_at (const MobilityTrace &trace, double t_s)
{
  const auto &wp = trace.waypoints;
  if (wp.empty ())
    throw ValidationError ("position_at: trace " + std::to_string (trace.vehicle_id) + " has no waypoints");
  if (t_s <= wp.front ().time_s)
    return {wp.front ().position (), wp.front ().speed_mps, wp.front ().heading_rad};
  if (t_s >= wp.back ().time_s)
    return {wp.back ().position (), wp.back ().speed_mps, wp.back ().heading_rad};
  const auto hi = std::upper_bound (wp.begin (), wp.end (), t_s,
                                    [] (double t, const Waypoint &w) { return t < w.time_s; });
  const Waypoint &b = *hi;
  const Waypoint &a = *(hi - 1);
  const double f = (t_s - a.time_s) / (b.time_s - a.time_s);
  return {{a.x_m + f * (b.x_m - a.x_m), a.y_m + f * (b.y_m - a.y_m)}, a.speed_mps, a.heading_rad};
}

Point
position_at (const MobilityTrace &trace, double t_s)
{
  return state_at (trace, t_s).position;
}

std::vector<SimTime>
generation_schedule (const MobilityTrace &trace, double duration_s)
{
  if (!(trace.tx_rate_hz > 0.0))
    throw ValidationError ("generation_schedule: tx rate must be > 0");
  const SimTime end = SimTime::seconds (duration_s);
  const SimTime period = trace.period ();
  std::vector<SimTime> out;
  for (SimTime t = trace.gen_phase; t < end; t += period)
    out.push_back (t);
  return out;
}

Point
project_equirectangular (const GeoReference &ref, double lat_deg, double lon_deg)
{
  constexpr double deg = std::numbers::pi / 180.0;
  const double x = kEarthRadiusM * (lon_deg - ref.lon_deg) * deg * std::cos (ref.lat_deg * deg);
  const double y = kEarthRadiusM * (lat_deg - ref.lat_deg) * deg;
  return {x, y};
}

namespace {

std::vector<std::string_view>
split_csv (std::string_view line)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;)
    {
      const std::size_t comma = line.find (',', start);
      out.push_back (line.substr (start, comma - start));
      if (comma == std::string_view::npos)
        break;
      start = comma + 1;
    }
  return out;
}

double
parse_double (std::string_view field, std::size_t line_no, const char *name)
{
  double v = 0.0;
  const auto *first = field.data ();
  const auto *last = field.data () + field.size ();
  const auto res = std::from_chars (first, last, v);
  if (res.ec != std::errc () || res.ptr != last || !std::isfinite (v))
    throw ParseError (line_no, std::string ("invalid ") + name + " '" + std::string (field) + "'");
  return v;
}

std::uint32_t
parse_id (std::string_view field, std::size_t line_no)
{
  std::uint32_t v = 0;
  const auto *last = field.data () + field.size ();
  const auto res = std::from_chars (field.data (), last, v);
  if (res.ec != std::errc () || res.ptr != last || field.empty ())
    throw ParseError (line_no, "invalid vehicle_id '" + std::string (field) + "'");
  return v;
}

} // namespace

std::vector<MobilityTrace>
parse_trace_file (std::istream &in, const GeoReference *geo_ref)
{
  struct Row
  {
    Waypoint w;
    std::size_t line;
  };
  std::map<std::uint32_t, std::vector<Row>> by_id;
  std::optional<GeoReference> ref;
  if (geo_ref)
    ref = *geo_ref;
  bool gps = false;
  bool seen_first = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline (in, line))
    {
      ++line_no;
      if (!line.empty () && line.back () == '\r')
        line.pop_back ();
      if (line.empty ())
        continue;
      if (!seen_first)
        {
          seen_first = true;
          if (line.rfind ("time_s", 0) == 0)
            {
              const auto cols = split_csv (line);
              if (cols.size () != 6)
                throw ParseError (line_no, "header must have 6 columns");
              gps = cols[2] == "lat_deg";
              if (!gps && cols[2] != "x_m")
                throw ParseError (line_no, "unrecognised header column '" + std::string (cols[2]) + "'");
              continue;
            }
        }
      const auto f = split_csv (line);
      if (f.size () != 6)
        throw ParseError (line_no, "expected 6 fields, got " + std::to_string (f.size ()));
      Waypoint w;
      w.time_s = parse_double (f[0], line_no, "time_s");
      const std::uint32_t id = parse_id (f[1], line_no);
      const double a = parse_double (f[2], line_no, gps ? "lat_deg" : "x_m");
      const double b = parse_double (f[3], line_no, gps ? "lon_deg" : "y_m");
      w.speed_mps = parse_double (f[4], line_no, "speed_mps");
      w.heading_rad = parse_double (f[5], line_no, "heading_rad");
      if (w.time_s < 0.0)
        throw ParseError (line_no, "time_s must be >= 0");
      if (w.speed_mps < 0.0)
        throw ParseError (line_no, "speed_mps must be >= 0");
      if (w.heading_rad < 0.0 || w.heading_rad >= kTwoPi)
        throw ParseError (line_no, "heading_rad must lie in [0, 2pi)");
      if (gps)
        {
          if (!ref)
            ref = GeoReference{a, b};
          const Point p = project_equirectangular (*ref, a, b);
          w.x_m = p.x_m;
          w.y_m = p.y_m;
        }
      else
        {
          w.x_m = a;
          w.y_m = b;
        }
      by_id[id].push_back ({w, line_no});
    }

  std::vector<MobilityTrace> out;
  for (auto &[id, rows] : by_id)
    {
      std::stable_sort (rows.begin (), rows.end (),
                        [] (const Row &x, const Row &y) { return x.w.time_s < y.w.time_s; });
      MobilityTrace tr;
      tr.vehicle_id = id;
      for (std::size_t i = 0; i < rows.size (); ++i)
        {
          if (i > 0 && rows[i].w.time_s == rows[i - 1].w.time_s)
            throw ValidationError ("vehicle " + std::to_string (id) + ": duplicate timestamp "
                                   + fmt::format ("{}", rows[i].w.time_s) + " (lines "
                                   + std::to_string (rows[i - 1].line) + " and " + std::to_string (rows[i].line) + ")");
          tr.waypoints.push_back (rows[i].w);
        }
      out.push_back (std::move (tr));
    }
  return out;
}

std::vector<MobilityTrace>
parse_trace_file (const std::filesystem::path &path, const GeoReference *geo_ref)
{
  std::ifstream in (path);
  if (!in)
    throw IoError (path.string (), "cannot open trace file");
  return parse_trace_file (in, geo_ref);
}

std::string
trace_file_name (std::uint32_t vehicle_id)
{
  return fmt::format ("vehicle_{}.csv", vehicle_id);
}

namespace {

void
write_trace (const MobilityTrace &tr, const std::filesystem::path &path)
{
  std::ofstream out (path, std::ios::binary);
  if (!out)
    throw IoError (path.string (), "cannot create trace file");
  std::string buf = "time_s,vehicle_id,x_m,y_m,speed_mps,heading_rad\n";
  for (const Waypoint &w : tr.waypoints)
    buf += fmt::format ("{},{},{},{},{},{}\n", w.time_s, tr.vehicle_id, w.x_m, w.y_m, w.speed_mps, w.heading_rad);
  out << buf;
  if (!out)
    throw IoError (path.string (), "write failed");
}

nlohmann::json
vehicle_entry (const MobilityTrace &tr, const char *role)
{
  return {{"id", tr.vehicle_id},
          {"role", role},
          {"file", trace_file_name (tr.vehicle_id)},
          {"tx_rate_hz", tr.tx_rate_hz},
          {"gen_phase_s", tr.gen_phase.to_seconds ()},
          {"gen_phase_ps", tr.gen_phase.count ()}};
}

} // namespace

std::vector<std::filesystem::path>
write_trace_files (const Scenario &scenario, const std::filesystem::path &directory)
{
  std::error_code ec;
  std::filesystem::create_directories (directory, ec);
  if (ec)
    throw IoError (directory.string (), ec.message ());

  std::vector<std::filesystem::path> paths;
  nlohmann::json vehicles = nlohmann::json::array ();
  auto emit = [&] (const MobilityTrace &tr, const char *role) {
    const auto path = directory / trace_file_name (tr.vehicle_id);
    write_trace (tr, path);
    paths.push_back (path);
    vehicles.push_back (vehicle_entry (tr, role));
  };
  emit (scenario.hv_trace, "hv");
  for (const auto &tr : scenario.rv_traces)
    emit (tr, "rv");

  const nlohmann::json manifest = {{"format", "rtcsim-scenario/1"},
                                   {"hv_id", scenario.hv_trace.vehicle_id},
                                   {"duration_s", scenario.duration_s},
                                   {"seed", scenario.seed},
                                   {"tx_rate_hz", scenario.hv_trace.tx_rate_hz},
                                   {"vehicles", vehicles}};
  const auto mpath = directory / "manifest.json";
  std::ofstream out (mpath, std::ios::binary);
  if (!out)
    throw IoError (mpath.string (), "cannot create manifest");
  out << manifest.dump (2) << '\n';
  if (!out)
    throw IoError (mpath.string (), "write failed");
  return paths;
}

Scenario
load_scenario (const std::filesystem::path &directory)
{
  const auto mpath = directory / "manifest.json";
  std::ifstream in (mpath);
  if (!in)
    throw IoError (mpath.string (), "cannot open manifest");
  nlohmann::json m;
  try
    {
      m = nlohmann::json::parse (in);
    }
  catch (const nlohmann::json::exception &e)
    {
      throw IoError (mpath.string (), std::string ("invalid manifest: ") + e.what ());
    }

  Scenario sc;
  try
    {
      sc.duration_s = m.at ("duration_s").get<double> ();
      sc.seed = m.at ("seed").get<std::uint64_t> ();
      const auto hv_id = m.at ("hv_id").get<std::uint32_t> ();
      const double default_rate = m.value ("tx_rate_hz", 10.0);

      // HV first so GPS logs share its first waypoint as projection origin.
      std::vector<nlohmann::json> entries (m.at ("vehicles").begin (), m.at ("vehicles").end ());
      std::stable_partition (entries.begin (), entries.end (),
                             [&] (const nlohmann::json &e) { return e.at ("id").get<std::uint32_t> () == hv_id; });
      std::optional<GeoReference> geo;
      bool have_hv = false;
      for (const auto &e : entries)
        {
          const auto id = e.at ("id").get<std::uint32_t> ();
          const auto path = directory / e.at ("file").get<std::string> ();
          std::ifstream probe (path);
          if (!probe)
            throw IoError (path.string (), "cannot open trace file");
          std::string header;
          std::getline (probe, header);
          if (header.rfind ("time_s,vehicle_id,lat_deg", 0) == 0 && !geo)
            {
              std::string first;
              std::getline (probe, first);
              std::istringstream row (first);
              auto traces = parse_trace_file (row); // headerless: planar read of lat/lon
              if (!traces.empty ())
                geo = GeoReference{traces[0].waypoints[0].x_m, traces[0].waypoints[0].y_m};
            }
          auto traces = parse_trace_file (path, geo ? &*geo : nullptr);
          if (traces.size () != 1 || traces[0].vehicle_id != id)
            throw ValidationError (path.string () + ": expected exactly the rows of vehicle " + std::to_string (id));
          MobilityTrace tr = std::move (traces[0]);
          tr.tx_rate_hz = e.value ("tx_rate_hz", default_rate);
          if (e.contains ("gen_phase_ps"))
            tr.gen_phase = SimTime::ps (e.at ("gen_phase_ps").get<std::int64_t> ());
          else
            tr.gen_phase = SimTime::seconds (e.value ("gen_phase_s", 0.0));
          if (id == hv_id)
            {
              sc.hv_trace = std::move (tr);
              have_hv = true;
            }
          else
            sc.rv_traces.push_back (std::move (tr));
        }
      if (!have_hv)
        throw ValidationError ("manifest: hv_id " + std::to_string (hv_id) + " has no trace entry");
    }
  catch (const nlohmann::json::exception &e)
    {
      throw IoError (mpath.string (), std::string ("invalid manifest: ") + e.what ());
    }
  sc.validate ();
  return sc;
}

} // namespace rtcsim
