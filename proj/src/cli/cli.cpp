#include "rtcsim/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "rtcsim/config.hpp"
#include "rtcsim/errors.hpp"
#include "rtcsim/metrics.hpp"
#include "rtcsim/realtime.hpp"
#include "rtcsim/scenario.hpp"
#include "rtcsim/scheduler.hpp"
#include "rtcsim/udp.hpp"

namespace rtcsim::cli {

namespace fs = std::filesystem;

void
setup_logging ()
{
  auto logger = spdlog::get ("rtcsim");
  if (!logger)
    logger = spdlog::stderr_color_mt ("rtcsim");
  spdlog::set_default_logger (logger);
  spdlog::set_pattern ("[%H:%M:%S.%e] [%l] %v");
  const char *env = std::getenv ("RTCSIM_LOG");
  spdlog::set_level (env != nullptr && *env != '\0' ? spdlog::level::from_str (env) : spdlog::level::warn);
}

namespace {

/// Flags that map one-to-one onto config keys.
struct Flags
{
  std::vector<std::pair<std::string, std::string>> values; ///< (key, flag value), in declaration order
  std::vector<std::unique_ptr<std::string>> storage;

  void
  add (CLI::App *app, const std::string &flag, const std::string &key, const std::string &help)
  {
    storage.push_back (std::make_unique<std::string> ());
    values.emplace_back (key, flag);
    app->add_option (flag, *storage.back (), help + " (" + key + ")");
  }

  void
  collect (CLI::App *app, std::vector<std::string> &overrides) const
  {
    for (std::size_t i = 0; i < values.size (); ++i)
      if (app->count (values[i].second) > 0)
        overrides.push_back (values[i].first + "=" + *storage[i]);
  }
};

void
add_scenario_flags (CLI::App *app, Flags &f)
{
  f.add (app, "--topology", "scenario.topology", "disk, linear or intersection");
  f.add (app, "--radius", "scenario.radius_m", "disk radius in m");
  f.add (app, "--length", "scenario.length_m", "linear road length in m");
  f.add (app, "--arm-length", "scenario.arm_length_m", "intersection arm length in m");
  f.add (app, "--vehicles", "scenario.vehicles", "vehicle count including the HV");
  f.add (app, "--speed", "scenario.speed_mps", "RV speed in m/s");
  f.add (app, "--duration", "run.duration_s", "simulated seconds");
  f.add (app, "--seed", "run.seed", "RNG seed");
  f.add (app, "--out", "run.out", "output directory");
}

void
write_file (const fs::path &path, const std::string &text)
{
  std::ofstream f (path, std::ios::binary);
  if (!f)
    throw IoError (path.string (), "cannot open for writing");
  f << text;
  if (!f.flush ())
    throw IoError (path.string (), "write failed");
}

template <typename Fn>
void
write_with (const fs::path &path, Fn &&fn)
{
  std::ostringstream s;
  fn (s);
  write_file (path, s.str ());
}

Scenario
resolve_scenario (const RunConfig &c)
{
  if (c.trace_dir)
    return load_scenario (*c.trace_dir);
  return generate_topology (c.topology, c.speed_mps, c.duration_s, c.seed, c.mac.tx_rate_hz);
}

int
cmd_gen (const RunConfig &c, std::ostream &out)
{
  const Scenario s = resolve_scenario (c);
  fs::create_directories (c.out);
  const auto files = write_trace_files (s, c.out);
  out << fmt::format ("wrote {} trace files + manifest.json to {} (topology {}, {} vehicles, seed {})\n",
                      files.size (), c.out.string (), to_string (c.topology.kind), s.vehicle_count (), c.seed);
  return kOk;
}

int
cmd_run (const RunConfig &c, std::ostream &out, std::ostream &err)
{
  const Scenario scenario = resolve_scenario (c);
  const PathLossModel model = c.channel_model ();
  spdlog::info ("run: {} vehicles, channel {}, {} s, seed {}, mode {}", scenario.vehicle_count (), c.channel,
                scenario.duration_s, scenario.seed, to_string (c.mode));

  RunResult result;
  RunStats stats;
  std::optional<std::string> violation;
  if (c.mode == RunMode::Batch)
    {
      const auto t0 = std::chrono::steady_clock::now ();
      const PacketPlan plan = build_plan (scenario, model, c.radio, c.mac, c.hv_transmits);
      RngBackoff backoff (scenario.seed);
      result = run (plan, c.mac, c.radio, model, backoff, SchedulerOptions{true});
      stats.wall_time_s = std::chrono::duration<double> (std::chrono::steady_clock::now () - t0).count ();
      stats.sim_duration_s = scenario.duration_s;
      stats.speedup = stats.wall_time_s > 0.0 ? stats.sim_duration_s / stats.wall_time_s : 0.0;
      stats.counters = result.counters;
    }
  else
    {
      std::unique_ptr<EventSink> sink;
      if (c.emit_udp)
        sink = std::make_unique<UdpSink> (*c.emit_udp);
      else
        sink = std::make_unique<NullSink> ();
      RealtimeOptions opt;
      opt.speed = c.realtime_speed;
      RealtimeRun rt = run_realtime (scenario, model, c.radio, c.mac, *sink, opt, c.hv_transmits);
      result = std::move (rt.result);
      stats = rt.stats;
      violation = rt.violation;
      spdlog::info ("realtime: {} events delivered", rt.delivered);
    }

  fs::create_directories (c.out);
  write_with (c.out / "events.csv", [&] (std::ostream &s) { write_event_log (s, result.events); });
  if (violation)
    {
      err << "error: real-time violation: " << *violation << " (partial event log written)\n";
      return kRealtime;
    }
  check_invariants (result, c.mac, c.radio, model);

  const CbpSeries cbp = compute_cbp (result.events, scenario.duration_s, c.radio, c.cbp_window_s);
  const PerHistogram per = compute_per (result, c.per_bin_m, c.per_max_m);
  const std::vector<RssPoint> rss = rss_curve (c.radio, model, 1.0, 1000.0, 1.0);
  const std::string topology = c.trace_dir ? std::string ("trace") : std::string (to_string (c.topology.kind));
  const SimReport timed = summarize (result, cbp, per, stats, topology,
                                     static_cast<std::uint32_t> (scenario.vehicle_count ()), c.channel, scenario.seed);
  // files stay byte-identical across repeats; timing goes to its own file
  SimReport row = timed;
  row.wall_time_s.reset ();
  row.p99_delivery_lag_s.reset ();

  write_with (c.out / "cbp.csv", [&] (std::ostream &s) { write_cbp_csv (s, cbp); });
  write_with (c.out / "per.csv", [&] (std::ostream &s) { write_per_csv (s, per); });
  write_with (c.out / "rss.csv", [&] (std::ostream &s) { write_rss_csv (s, rss); });
  write_with (c.out / "plot.csv", [&] (std::ostream &s) { write_plot_csv (s, cbp, per, rss); });
  write_file (c.out / "summary.txt", render_table (std::span (&row, 1)));
  write_file (c.out / "report.csv", render_csv (std::span (&row, 1)));
  write_file (c.out / "report.json", render_json (row));
  write_file (c.out / "config.ini", dump_config (c));
  std::string timing = fmt::format ("wall_time_s = {}\nspeedup = {}\n", stats.wall_time_s, stats.speedup);
  if (stats.p99_delivery_lag_s)
    timing += fmt::format ("p99_delivery_lag_s = {}\n", *stats.p99_delivery_lag_s);
  write_file (c.out / "timing.txt", timing);

  out << render_table (std::span (&timed, 1));
  return kOk;
}

int
cmd_rss (const RunConfig &c, double d_min, double d_max, double step, const std::string &file, std::ostream &out)
{
  const std::vector<RssPoint> curve = rss_curve (c.radio, c.channel_model (), d_min, d_max, step);
  if (file.empty ())
    write_rss_csv (out, curve);
  else
    write_with (file, [&] (std::ostream &s) { write_rss_csv (s, curve); });
  return kOk;
}

int
cmd_report (const std::vector<std::string> &inputs, const std::string &csv, std::ostream &out)
{
  std::vector<SimReport> rows;
  for (const std::string &in : inputs)
    {
      fs::path p = in;
      if (fs::is_directory (p))
        p /= "report.json";
      std::ifstream f (p);
      if (!f)
        throw IoError (p.string (), "cannot open report");
      std::stringstream text;
      text << f.rdbuf ();
      rows.push_back (parse_report_json (text.str ()));
    }
  sort_reports (rows);
  out << render_table (rows);
  if (!csv.empty ())
    write_file (csv, render_csv (rows));
  return kOk;
}

} // namespace

int
main (const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
  CLI::App app ("DSRC V2V broadcast emulator", "rtcsim");
  app.require_subcommand (0, 1);
  app.fallthrough ();

  std::string config_file;
  std::vector<std::string> sets;
  bool dump = false;
  app.add_option ("--config", config_file, "INI config file")->check (CLI::ExistingFile);
  app.add_option ("--set", sets, "override, section.key=value (repeatable)");
  app.add_flag ("--dump-config", dump, "print the effective config and exit");

  Flags gen_flags, run_flags, rss_flags;
  CLI::App *gen = app.add_subcommand ("gen", "write a synthetic scenario as trace files");
  add_scenario_flags (gen, gen_flags);

  CLI::App *runc = app.add_subcommand ("run", "simulate and write the event log and reports");
  add_scenario_flags (runc, run_flags);
  run_flags.add (runc, "--scenario", "scenario.trace_dir", "scenario directory from gen");
  run_flags.add (runc, "--channel", "run.channel", "fowlerville or three_log_distance");
  run_flags.add (runc, "--mode", "run.mode", "batch or realtime");
  run_flags.add (runc, "--emit-udp", "run.emit_udp", "host:port for decoded BSMs");
  run_flags.add (runc, "--realtime-speed", "run.realtime_speed", "simulated seconds per wall second");
  run_flags.add (runc, "--hv-transmits", "run.hv_transmits", "true or false");
  bool null_sink = false;
  runc->add_flag ("--null-sink", null_sink, "realtime without UDP output (run.null_sink)");

  CLI::App *rss = app.add_subcommand ("rss", "tabulate RSS against distance");
  rss_flags.add (rss, "--channel", "run.channel", "fowlerville or three_log_distance");
  double d_min = 1.0, d_max = 1000.0, step = 1.0;
  std::string rss_out;
  rss->add_option ("--d-min", d_min, "first distance in m")->capture_default_str ();
  rss->add_option ("--d-max", d_max, "last distance in m")->capture_default_str ();
  rss->add_option ("--step", step, "distance step in m")->capture_default_str ();
  rss->add_option ("--out", rss_out, "CSV file (default stdout)");

  CLI::App *report = app.add_subcommand ("report", "merge report.json files into one table");
  std::vector<std::string> inputs;
  std::string report_csv;
  report->add_option ("inputs", inputs, "report.json files or run directories")->required ();
  report->add_option ("--csv", report_csv, "also write the table as CSV");

  try
    {
      std::vector<std::string> rev (args.rbegin (), args.rend ());
      app.parse (rev);
    }
  catch (const CLI::ParseError &e)
    {
      const int rc = app.exit (e, out, err);
      return rc == 0 ? kOk : kUsage;
    }

  setup_logging ();
  try
    {
      std::vector<std::string> overrides = sets;
      gen_flags.collect (gen, overrides);
      run_flags.collect (runc, overrides);
      rss_flags.collect (rss, overrides);
      if (null_sink)
        overrides.emplace_back ("run.null_sink=true");
      const RunConfig config
          = load_config (config_file.empty () ? std::nullopt : std::optional<fs::path> (config_file), overrides);

      if (dump)
        {
          out << dump_config (config);
          return kOk;
        }
      if (gen->parsed ())
        return cmd_gen (config, out);
      if (runc->parsed ())
        return cmd_run (config, out, err);
      if (rss->parsed ())
        return cmd_rss (config, d_min, d_max, step, rss_out, out);
      if (report->parsed ())
        return cmd_report (inputs, report_csv, out);
      out << app.help ();
      return kUsage;
    }
  catch (const ValidationError &e)
    {
      err << "error: " << e.what () << "\n";
      return kUsage;
    }
  catch (const ParseError &e)
    {
      err << "error: " << e.what () << "\n";
      return kUsage;
    }
  catch (const RealtimeViolation &e)
    {
      err << "error: real-time violation: " << e.what () << "\n";
      return kRealtime;
    }
  catch (const InvariantError &e)
    {
      err << "error: invariant violated: " << e.what () << "\n";
      return kInvariant;
    }
  catch (const IoError &e)
    {
      err << "error: " << e.what () << "\n";
      return kIo;
    }
  catch (const fs::filesystem_error &e)
    {
      err << "error: " << e.what () << "\n";
      return kIo;
    }
  catch (const std::exception &e)
    {
      err << "error: unexpected: " << e.what () << "\n";
      return kUnexpected;
    }
}

} // namespace rtcsim::cli
