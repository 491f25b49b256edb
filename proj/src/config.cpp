#include "rtcsim/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <boost/algorithm/string/trim.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "rtcsim/errors.hpp"

namespace rtcsim {

std::string_view
to_string (RunMode mode)
{
  return mode == RunMode::Batch ? "batch" : "realtime";
}

RunMode
parse_run_mode (std::string_view name)
{
  if (name == "batch")
    return RunMode::Batch;
  if (name == "realtime")
    return RunMode::Realtime;
  throw ValidationError ("unknown mode '" + std::string (name) + "'");
}

PathLossModel
RunConfig::channel_model () const
{
  if (channel == "three_log_distance")
    return PathLossModel::three_log_distance (three_log.d0_m, three_log.d1_m, three_log.d2_m, three_log.n0,
                                              three_log.n1, three_log.n2, three_log.ref_loss_db);
  if (channel == "fowlerville")
    return PathLossModel::fowlerville (fowlerville.boundaries_m, fowlerville.exponents, fowlerville.ref_loss_db,
                                       fowlerville.shadowing_sigma_db, fowlerville.shadowing_seed);
  throw ValidationError ("unknown channel profile '" + channel + "'");
}

void
RunConfig::validate () const
{
  if (!trace_dir)
    topology.validate ();
  if (!(speed_mps >= 0.0))
    throw ValidationError ("scenario.speed_mps must be >= 0");
  (void) channel_model ();
  radio.validate ();
  mac.validate ();
  if (!(duration_s > 0.0))
    throw ValidationError ("run.duration_s must be > 0");
  if (mode == RunMode::Realtime && !emit_udp && !null_sink)
    throw ValidationError ("realtime mode needs run.emit_udp or run.null_sink = true");
  if (!(realtime_speed > 0.0))
    throw ValidationError ("run.realtime_speed must be > 0");
  if (!(cbp_window_s > 0.0))
    throw ValidationError ("metrics.cbp_window_s must be > 0");
  if (!(per_bin_m > 0.0) || !(per_max_m > 0.0))
    throw ValidationError ("metrics.per_bin_m and metrics.per_max_m must be > 0");
}

namespace {

double
parse_double (const std::string &s)
{
  double v = 0.0;
  const char *end = s.data () + s.size ();
  const auto [ptr, ec] = std::from_chars (s.data (), end, v);
  if (ec != std::errc{} || ptr != end)
    throw ValidationError ("'" + s + "' is not a number");
  return v;
}

std::uint64_t
parse_u64 (const std::string &s)
{
  std::uint64_t v = 0;
  const char *end = s.data () + s.size ();
  const auto [ptr, ec] = std::from_chars (s.data (), end, v);
  if (ec != std::errc{} || ptr != end)
    throw ValidationError ("'" + s + "' is not a non-negative integer");
  return v;
}

std::uint32_t
parse_u32 (const std::string &s)
{
  const std::uint64_t v = parse_u64 (s);
  if (v > 0xFFFFFFFFULL)
    throw ValidationError ("'" + s + "' is out of range");
  return static_cast<std::uint32_t> (v);
}

bool
parse_bool (const std::string &s)
{
  if (s == "true" || s == "1" || s == "yes")
    return true;
  if (s == "false" || s == "0" || s == "no")
    return false;
  throw ValidationError ("'" + s + "' is not a boolean");
}

std::vector<double>
parse_list (const std::string &s)
{
  std::vector<double> out;
  std::stringstream in (s);
  std::string item;
  while (std::getline (in, item, ','))
    {
      const auto b = item.find_first_not_of (" \t");
      const auto e = item.find_last_not_of (" \t");
      if (b == std::string::npos)
        throw ValidationError ("empty item in list '" + s + "'");
      out.push_back (parse_double (item.substr (b, e - b + 1)));
    }
  return out;
}

std::string
num (double v)
{
  return fmt::format ("{}", v);
}

std::string
list (const std::vector<double> &v)
{
  return fmt::format ("{}", fmt::join (v, ", "));
}

// Microsecond keys carry exact picosecond values.
SimTime
parse_us (const std::string &s)
{
  return SimTime::ps (std::llround (parse_double (s) * 1e6));
}

std::string
us (SimTime t)
{
  if (t.count () % 1'000'000 == 0)
    return std::to_string (t.count () / 1'000'000);
  return num (static_cast<double> (t.count ()) / 1e6);
}

struct Key
{
  const char *name;
  std::function<void (RunConfig &, const std::string &)> set;
  std::function<std::string (const RunConfig &)> get;
};

const std::vector<Key> &
keys ()
{
  static const std::vector<Key> table = {
    {"scenario.topology", [] (RunConfig &c, const std::string &v) { c.topology.kind = parse_topology_kind (v); },
     [] (const RunConfig &c) { return std::string (to_string (c.topology.kind)); }},
    {"scenario.vehicles", [] (RunConfig &c, const std::string &v) { c.topology.vehicle_count = parse_u32 (v); },
     [] (const RunConfig &c) { return std::to_string (c.topology.vehicle_count); }},
    {"scenario.radius_m", [] (RunConfig &c, const std::string &v) { c.topology.radius_m = parse_double (v); },
     [] (const RunConfig &c) { return num (c.topology.radius_m); }},
    {"scenario.length_m", [] (RunConfig &c, const std::string &v) { c.topology.length_m = parse_double (v); },
     [] (const RunConfig &c) { return num (c.topology.length_m); }},
    {"scenario.arm_length_m",
     [] (RunConfig &c, const std::string &v) { c.topology.arm_length_m = parse_double (v); },
     [] (const RunConfig &c) { return num (c.topology.arm_length_m); }},
    {"scenario.hv_position",
     [] (RunConfig &c, const std::string &v) {
       if (v == "center")
         {
           c.topology.hv_position.reset ();
           return;
         }
       const std::vector<double> xy = parse_list (v);
       if (xy.size () != 2)
         throw ValidationError ("'" + v + "' is neither 'center' nor 'x, y'");
       c.topology.hv_position = Point{xy[0], xy[1]};
     },
     [] (const RunConfig &c) {
       if (!c.topology.hv_position)
         return std::string ("center");
       return num (c.topology.hv_position->x_m) + ", " + num (c.topology.hv_position->y_m);
     }},
    {"scenario.speed_mps", [] (RunConfig &c, const std::string &v) { c.speed_mps = parse_double (v); },
     [] (const RunConfig &c) { return num (c.speed_mps); }},
    {"scenario.trace_dir",
     [] (RunConfig &c, const std::string &v) {
       if (v.empty ())
         c.trace_dir.reset ();
       else
         c.trace_dir = v;
     },
     [] (const RunConfig &c) { return c.trace_dir ? c.trace_dir->string () : std::string (); }},

    {"run.channel", [] (RunConfig &c, const std::string &v) { c.channel = v; },
     [] (const RunConfig &c) { return c.channel; }},
    {"run.duration_s", [] (RunConfig &c, const std::string &v) { c.duration_s = parse_double (v); },
     [] (const RunConfig &c) { return num (c.duration_s); }},
    {"run.seed", [] (RunConfig &c, const std::string &v) { c.seed = parse_u64 (v); },
     [] (const RunConfig &c) { return std::to_string (c.seed); }},
    {"run.mode", [] (RunConfig &c, const std::string &v) { c.mode = parse_run_mode (v); },
     [] (const RunConfig &c) { return std::string (to_string (c.mode)); }},
    {"run.out", [] (RunConfig &c, const std::string &v) { c.out = v; },
     [] (const RunConfig &c) { return c.out.string (); }},
    {"run.emit_udp",
     [] (RunConfig &c, const std::string &v) {
       if (v.empty ())
         c.emit_udp.reset ();
       else
         c.emit_udp = parse_endpoint (v);
     },
     [] (const RunConfig &c) { return c.emit_udp ? c.emit_udp->to_string () : std::string (); }},
    {"run.null_sink", [] (RunConfig &c, const std::string &v) { c.null_sink = parse_bool (v); },
     [] (const RunConfig &c) { return std::string (c.null_sink ? "true" : "false"); }},
    {"run.hv_transmits", [] (RunConfig &c, const std::string &v) { c.hv_transmits = parse_bool (v); },
     [] (const RunConfig &c) { return std::string (c.hv_transmits ? "true" : "false"); }},
    {"run.realtime_speed", [] (RunConfig &c, const std::string &v) { c.realtime_speed = parse_double (v); },
     [] (const RunConfig &c) { return num (c.realtime_speed); }},

    {"metrics.cbp_window_s", [] (RunConfig &c, const std::string &v) { c.cbp_window_s = parse_double (v); },
     [] (const RunConfig &c) { return num (c.cbp_window_s); }},
    {"metrics.per_bin_m", [] (RunConfig &c, const std::string &v) { c.per_bin_m = parse_double (v); },
     [] (const RunConfig &c) { return num (c.per_bin_m); }},
    {"metrics.per_max_m", [] (RunConfig &c, const std::string &v) { c.per_max_m = parse_double (v); },
     [] (const RunConfig &c) { return num (c.per_max_m); }},

    {"radio.tx_power_dbm", [] (RunConfig &c, const std::string &v) { c.radio.tx_power_dbm = parse_double (v); },
     [] (const RunConfig &c) { return num (c.radio.tx_power_dbm); }},
    {"radio.cs_threshold_dbm",
     [] (RunConfig &c, const std::string &v) { c.radio.cs_threshold_dbm = parse_double (v); },
     [] (const RunConfig &c) { return num (c.radio.cs_threshold_dbm); }},
    {"radio.rx_sensitivity_dbm",
     [] (RunConfig &c, const std::string &v) { c.radio.rx_sensitivity_dbm = parse_double (v); },
     [] (const RunConfig &c) { return num (c.radio.rx_sensitivity_dbm); }},
    {"radio.capture_margin_db",
     [] (RunConfig &c, const std::string &v) { c.radio.capture_margin_db = parse_double (v); },
     [] (const RunConfig &c) { return num (c.radio.capture_margin_db); }},
    {"radio.noise_floor_dbm",
     [] (RunConfig &c, const std::string &v) { c.radio.noise_floor_dbm = parse_double (v); },
     [] (const RunConfig &c) { return num (c.radio.noise_floor_dbm); }},

    {"mac.slot_us", [] (RunConfig &c, const std::string &v) { c.mac.slot_time = parse_us (v); },
     [] (const RunConfig &c) { return us (c.mac.slot_time); }},
    {"mac.sifs_us", [] (RunConfig &c, const std::string &v) { c.mac.sifs = parse_us (v); },
     [] (const RunConfig &c) { return us (c.mac.sifs); }},
    {"mac.cw_min", [] (RunConfig &c, const std::string &v) { c.mac.cw_min = parse_u32 (v); },
     [] (const RunConfig &c) { return std::to_string (c.mac.cw_min); }},
    {"mac.cw_max", [] (RunConfig &c, const std::string &v) { c.mac.cw_max = parse_u32 (v); },
     [] (const RunConfig &c) { return std::to_string (c.mac.cw_max); }},
    {"mac.tx_interval_us", [] (RunConfig &c, const std::string &v) { c.mac.tx_interval = parse_us (v); },
     [] (const RunConfig &c) { return us (c.mac.tx_interval); }},
    {"mac.pd_mode", [] (RunConfig &c, const std::string &v) { c.mac.pd_mode = parse_pd_mode (v); },
     [] (const RunConfig &c) { return std::string (to_string (c.mac.pd_mode)); }},
    {"mac.pd_us", [] (RunConfig &c, const std::string &v) { c.mac.pd = parse_us (v); },
     [] (const RunConfig &c) { return us (c.mac.pd); }},
    {"mac.tx_rate_hz", [] (RunConfig &c, const std::string &v) { c.mac.tx_rate_hz = parse_double (v); },
     [] (const RunConfig &c) { return num (c.mac.tx_rate_hz); }},

    {"channel.three_log_distance.d0_m", [] (RunConfig &c, const std::string &v) { c.three_log.d0_m = parse_double (v); },
     [] (const RunConfig &c) { return num (c.three_log.d0_m); }},
    {"channel.three_log_distance.d1_m", [] (RunConfig &c, const std::string &v) { c.three_log.d1_m = parse_double (v); },
     [] (const RunConfig &c) { return num (c.three_log.d1_m); }},
    {"channel.three_log_distance.d2_m", [] (RunConfig &c, const std::string &v) { c.three_log.d2_m = parse_double (v); },
     [] (const RunConfig &c) { return num (c.three_log.d2_m); }},
    {"channel.three_log_distance.n0", [] (RunConfig &c, const std::string &v) { c.three_log.n0 = parse_double (v); },
     [] (const RunConfig &c) { return num (c.three_log.n0); }},
    {"channel.three_log_distance.n1", [] (RunConfig &c, const std::string &v) { c.three_log.n1 = parse_double (v); },
     [] (const RunConfig &c) { return num (c.three_log.n1); }},
    {"channel.three_log_distance.n2", [] (RunConfig &c, const std::string &v) { c.three_log.n2 = parse_double (v); },
     [] (const RunConfig &c) { return num (c.three_log.n2); }},
    {"channel.three_log_distance.ref_loss_db",
     [] (RunConfig &c, const std::string &v) { c.three_log.ref_loss_db = parse_double (v); },
     [] (const RunConfig &c) { return num (c.three_log.ref_loss_db); }},

    {"channel.fowlerville.boundaries_m",
     [] (RunConfig &c, const std::string &v) { c.fowlerville.boundaries_m = parse_list (v); },
     [] (const RunConfig &c) { return list (c.fowlerville.boundaries_m); }},
    {"channel.fowlerville.exponents",
     [] (RunConfig &c, const std::string &v) { c.fowlerville.exponents = parse_list (v); },
     [] (const RunConfig &c) { return list (c.fowlerville.exponents); }},
    {"channel.fowlerville.ref_loss_db",
     [] (RunConfig &c, const std::string &v) { c.fowlerville.ref_loss_db = parse_double (v); },
     [] (const RunConfig &c) { return num (c.fowlerville.ref_loss_db); }},
    {"channel.fowlerville.shadowing_sigma_db",
     [] (RunConfig &c, const std::string &v) { c.fowlerville.shadowing_sigma_db = parse_double (v); },
     [] (const RunConfig &c) { return num (c.fowlerville.shadowing_sigma_db); }},
    {"channel.fowlerville.shadowing_seed",
     [] (RunConfig &c, const std::string &v) { c.fowlerville.shadowing_seed = parse_u64 (v); },
     [] (const RunConfig &c) { return std::to_string (c.fowlerville.shadowing_seed); }},
  };
  return table;
}

std::string
section_of (const std::string &key)
{
  return key.substr (0, key.rfind ('.'));
}

} // namespace

Settings
read_settings (std::istream &in)
{
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try
    {
      pt::ini_parser::read_ini (in, tree);
    }
  catch (const pt::ini_parser_error &e)
    {
      throw ParseError (e.line (), e.message ());
    }
  Settings out;
  for (const auto &[section, node] : tree)
    {
      if (node.empty () && !node.data ().empty ())
        throw ValidationError ("key '" + section + "' outside any section");
      for (const auto &[key, value] : node)
        out[section + "." + key] = value.data ();
    }
  return out;
}

Settings
read_settings (const std::filesystem::path &path)
{
  std::ifstream in (path);
  if (!in)
    throw IoError (path.string (), "cannot open config");
  return read_settings (in);
}

void
add_override (Settings &settings, const std::string &assignment)
{
  const auto eq = assignment.find ('=');
  if (eq == std::string::npos || eq == 0 || assignment.find ('.') > eq)
    throw ValidationError ("override '" + assignment + "' is not section.key=value");
  settings[boost::algorithm::trim_copy (assignment.substr (0, eq))] = boost::algorithm::trim_copy (assignment.substr (eq + 1));
}

void
apply_settings (RunConfig &config, const Settings &settings)
{
  for (const auto &[name, value] : settings)
    {
      const Key *key = nullptr;
      for (const Key &k : keys ())
        if (name == k.name)
          key = &k;
      if (key == nullptr)
        throw ValidationError ("unknown config key '" + name + "'");
      try
        {
          key->set (config, value);
        }
      catch (const ValidationError &e)
        {
          throw ValidationError (name + ": " + e.what ());
        }
    }
}

RunConfig
load_config (const std::optional<std::filesystem::path> &file, const std::vector<std::string> &overrides)
{
  Settings s;
  if (file)
    s = read_settings (*file);
  for (const std::string &o : overrides)
    add_override (s, o);
  RunConfig c;
  apply_settings (c, s);
  c.validate ();
  return c;
}

std::string
dump_config (const RunConfig &config)
{
  std::string out;
  std::string section;
  for (const Key &k : keys ())
    {
      const std::string name = k.name;
      const std::string sec = section_of (name);
      if (sec != section)
        {
          out += (out.empty () ? "[" : "\n[") + sec + "]\n";
          section = sec;
        }
      out += name.substr (sec.size () + 1) + " = " + k.get (config) + "\n";
    }
  return out;
}

std::vector<std::string>
known_keys ()
{
  std::vector<std::string> out;
  for (const Key &k : keys ())
    out.emplace_back (k.name);
  return out;
}

} // namespace rtcsim
