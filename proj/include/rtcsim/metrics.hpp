#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rtcsim/channel.hpp"
#include "rtcsim/scheduler.hpp"

namespace rtcsim {

struct CbpSample
{
  double t_start_s = 0.0;
  double busy_fraction = 0.0;
};

struct CbpSeries
{
  double window_s = 0.1;
  std::vector<CbpSample> samples;
  double average = 0.0; ///< busy time over the whole run / duration
};

/// Channel busy percentage at the HV: union of all on-air intervals whose
/// RSS at the HV reaches the carrier-sense threshold (the HV's own frames
/// count), per window of [0, duration). A trailing partial window is
/// normalised by its own length.
CbpSeries compute_cbp (std::span<const TxEvent> events, double duration_s, const RadioConfig &radio,
                       double window_s);

struct PerBin
{
  double d_lo_m = 0.0;
  double d_hi_m = 0.0;
  std::uint64_t sent = 0;
  std::uint64_t errors = 0;
  std::optional<double> per; ///< empty when nothing was sent
};

struct PerHistogram
{
  double bin_width_m = 25.0;
  double max_distance_m = 400.0;
  std::vector<PerBin> bins;
  double average = 0.0; ///< unweighted mean over populated bins
  double pooled = 0.0;  ///< total errors / total sent
};

/// PER versus TX-HV distance at generation time, RV packets only. A packet
/// is an error unless it won its occupancy; expired packets are errors.
PerHistogram compute_per (const RunResult &result, double bin_width_m, double max_distance_m);

struct RssPoint
{
  double distance_m = 0.0;
  double rss_dbm = 0.0;
};

/// rss_dbm at d_min, d_min + step, ... up to d_max inclusive.
std::vector<RssPoint> rss_curve (const RadioConfig &radio, const PathLossModel &model, double d_min,
                                 double d_max, double step);

struct RunStats
{
  double sim_duration_s = 0.0;
  double wall_time_s = 0.0;
  double speedup = 0.0;
  PacketCounters counters;
  std::optional<double> p99_delivery_lag_s;
  std::uint64_t realtime_violations = 0;
};

/// One row of the result tables.
struct SimReport
{
  std::string topology;
  std::uint32_t vehicles = 0;
  std::string channel;
  std::uint64_t seed = 0;
  double duration_s = 0.0;
  double cbp_percent = 0.0;
  double per_percent = 0.0;
  double per_pooled_percent = 0.0;
  std::uint64_t events = 0;
  PacketCounters counters;
  bool no_traffic = false;
  std::optional<double> wall_time_s;
  std::optional<double> p99_delivery_lag_s;

  /// wall time below the simulated duration
  bool realtime_capable () const { return wall_time_s && *wall_time_s < duration_s; }
};

SimReport summarize (const RunResult &result, const CbpSeries &cbp, const PerHistogram &per,
                     const RunStats &stats, std::string topology, std::uint32_t vehicles, std::string channel,
                     std::uint64_t seed);

/// Rows ordered by (topology, channel, vehicles).
void sort_reports (std::vector<SimReport> &rows);

/// Fixed-width text table; the timing columns appear only when every row has
/// a wall time.
std::string render_table (std::span<const SimReport> rows);
std::string render_csv (std::span<const SimReport> rows);
std::string render_json (const SimReport &row);
SimReport parse_report_json (const std::string &text);

/// Picosecond-exact decimal seconds.
std::string format_seconds (SimTime t);

void write_event_log (std::ostream &out, std::span<const TxEvent> events);
void write_cbp_csv (std::ostream &out, const CbpSeries &cbp);
void write_per_csv (std::ostream &out, const PerHistogram &per);
void write_rss_csv (std::ostream &out, std::span<const RssPoint> curve);
/// Long format `series,x,y` with series cbp, per and rss.
void write_plot_csv (std::ostream &out, const CbpSeries &cbp, const PerHistogram &per,
                     std::span<const RssPoint> curve);

} // namespace rtcsim
