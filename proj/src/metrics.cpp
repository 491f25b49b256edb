#include "rtcsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <tuple>

#include <fmt/format.h>
#include "json.hpp"

#include "rtcsim/errors.hpp"

namespace rtcsim {

namespace {

using Json = nlohmann::ordered_json;

struct Interval
{
  std::int64_t lo;
  std::int64_t hi;
};

std::string
shortest (double v)
{
  return fmt::format ("{}", v);
}

Json
counters_json (const PacketCounters &c)
{
  return Json{{"generated", c.generated},       {"decoded", c.decoded},
              {"collided", c.collided},         {"below_sensitivity", c.below_sensitivity},
              {"own", c.own},                   {"expired", c.expired},
              {"queued", c.queued},             {"transmissions", c.transmissions},
              {"backoffs", c.backoffs},         {"aifs_deferrals", c.aifs_deferrals}};
}

PacketCounters
counters_from (const Json &j)
{
  PacketCounters c;
  c.generated = j.at ("generated").get<std::uint64_t> ();
  c.decoded = j.at ("decoded").get<std::uint64_t> ();
  c.collided = j.at ("collided").get<std::uint64_t> ();
  c.below_sensitivity = j.at ("below_sensitivity").get<std::uint64_t> ();
  c.own = j.at ("own").get<std::uint64_t> ();
  c.expired = j.at ("expired").get<std::uint64_t> ();
  c.queued = j.at ("queued").get<std::uint64_t> ();
  c.transmissions = j.at ("transmissions").get<std::uint64_t> ();
  c.backoffs = j.at ("backoffs").get<std::uint64_t> ();
  c.aifs_deferrals = j.at ("aifs_deferrals").get<std::uint64_t> ();
  return c;
}

} // namespace

CbpSeries
compute_cbp (std::span<const TxEvent> events, double duration_s, const RadioConfig &radio, double window_s)
{
  if (!(window_s > 0.0) || !std::isfinite (window_s))
    throw ValidationError ("compute_cbp: window must be > 0");
  if (!(duration_s > 0.0) || !std::isfinite (duration_s))
    throw ValidationError ("compute_cbp: duration must be > 0");
  const std::int64_t dur = SimTime::seconds (duration_s).count ();
  const std::int64_t win = SimTime::seconds (window_s).count ();
  if (win <= 0)
    throw ValidationError ("compute_cbp: window below time resolution");
  const std::int64_t n = (dur + win - 1) / win;

  std::vector<Interval> on_air;
  for (const TxEvent &ev : events)
    for (const Transmission &m : ev.members)
      if (m.rss_at_hv_dbm >= radio.cs_threshold_dbm)
        on_air.push_back ({m.start.count (), m.end.count ()});
  std::sort (on_air.begin (), on_air.end (), [] (const Interval &a, const Interval &b) { return a.lo < b.lo; });

  std::vector<std::int64_t> busy (static_cast<std::size_t> (n), 0);
  auto add = [&] (Interval iv) {
    iv.hi = std::min (iv.hi, dur);
    iv.lo = std::max<std::int64_t> (iv.lo, 0);
    while (iv.lo < iv.hi)
      {
        const std::int64_t w = iv.lo / win;
        const std::int64_t cut = std::min (iv.hi, (w + 1) * win);
        busy[static_cast<std::size_t> (w)] += cut - iv.lo;
        iv.lo = cut;
      }
  };
  if (!on_air.empty ())
    {
      Interval cur = on_air.front ();
      for (std::size_t i = 1; i < on_air.size (); ++i)
        {
          if (on_air[i].lo > cur.hi)
            {
              add (cur);
              cur = on_air[i];
            }
          else
            cur.hi = std::max (cur.hi, on_air[i].hi);
        }
      add (cur);
    }

  CbpSeries s;
  s.window_s = window_s;
  std::int64_t total = 0;
  for (std::int64_t w = 0; w < n; ++w)
    {
      const std::int64_t len = std::min (win, dur - w * win);
      const std::int64_t b = busy[static_cast<std::size_t> (w)];
      total += b;
      s.samples.push_back ({SimTime::ps (w * win).to_seconds (), static_cast<double> (b) / static_cast<double> (len)});
    }
  s.average = static_cast<double> (total) / static_cast<double> (dur);
  return s;
}

PerHistogram
compute_per (const RunResult &result, double bin_width_m, double max_distance_m)
{
  if (!(bin_width_m > 0.0) || !std::isfinite (bin_width_m))
    throw ValidationError ("compute_per: bin width must be > 0");
  if (!(max_distance_m > 0.0) || !std::isfinite (max_distance_m))
    throw ValidationError ("compute_per: max distance must be > 0");

  PerHistogram h;
  h.bin_width_m = bin_width_m;
  h.max_distance_m = max_distance_m;
  const auto n = static_cast<std::size_t> (std::ceil (max_distance_m / bin_width_m));
  for (std::size_t i = 0; i < n; ++i)
    h.bins.push_back ({static_cast<double> (i) * bin_width_m,
                       std::min (static_cast<double> (i + 1) * bin_width_m, max_distance_m), 0, 0, {}});

  auto tally = [&] (double d, bool error) {
    if (!(d < max_distance_m))
      return;
    auto i = static_cast<std::size_t> (d / bin_width_m);
    if (i >= n) // d just below the cap with a partial last bin
      i = n - 1;
    ++h.bins[i].sent;
    if (error)
      ++h.bins[i].errors;
  };

  for (const TxEvent &ev : result.events)
    for (const Transmission &m : ev.members)
      if (!m.from_hv)
        tally (m.hv_distance_m, !(ev.outcome == Outcome::Decoded && ev.winner_id == m.vehicle_id));
  for (const ExpiredPacket &e : result.expired)
    if (!e.from_hv)
      tally (e.hv_distance_m, true);

  std::uint64_t sent = 0, errors = 0;
  double sum = 0.0;
  std::size_t populated = 0;
  for (PerBin &b : h.bins)
    {
      sent += b.sent;
      errors += b.errors;
      if (b.sent > 0)
        {
          b.per = static_cast<double> (b.errors) / static_cast<double> (b.sent);
          sum += *b.per;
          ++populated;
        }
    }
  h.average = populated > 0 ? sum / static_cast<double> (populated) : 0.0;
  h.pooled = sent > 0 ? static_cast<double> (errors) / static_cast<double> (sent) : 0.0;
  return h;
}

std::vector<RssPoint>
rss_curve (const RadioConfig &radio, const PathLossModel &model, double d_min, double d_max, double step)
{
  if (!(d_min >= 0.0) || !(d_min < d_max) || !std::isfinite (d_max))
    throw ValidationError ("rss_curve: need 0 <= d_min < d_max");
  if (!(step > 0.0) || !std::isfinite (step))
    throw ValidationError ("rss_curve: step must be > 0");
  const auto n = static_cast<std::size_t> (std::floor ((d_max - d_min) / step + 1e-9)) + 1;
  std::vector<double> d (n), loss (n);
  for (std::size_t i = 0; i < n; ++i)
    d[i] = d_min + static_cast<double> (i) * step;
  model.loss_db (d, loss);
  std::vector<RssPoint> out (n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = {d[i], radio.tx_power_dbm - loss[i]};
  return out;
}

SimReport
summarize (const RunResult &result, const CbpSeries &cbp, const PerHistogram &per, const RunStats &stats,
           std::string topology, std::uint32_t vehicles, std::string channel, std::uint64_t seed)
{
  SimReport r;
  r.topology = std::move (topology);
  r.vehicles = vehicles;
  r.channel = std::move (channel);
  r.seed = seed;
  r.duration_s = stats.sim_duration_s;
  r.events = result.events.size ();
  r.counters = result.counters;
  r.no_traffic = result.events.empty ();
  if (!r.no_traffic)
    {
      r.cbp_percent = 100.0 * cbp.average;
      r.per_percent = 100.0 * per.average;
      r.per_pooled_percent = 100.0 * per.pooled;
    }
  if (stats.wall_time_s > 0.0)
    r.wall_time_s = stats.wall_time_s;
  r.p99_delivery_lag_s = stats.p99_delivery_lag_s;
  return r;
}

void
sort_reports (std::vector<SimReport> &rows)
{
  std::stable_sort (rows.begin (), rows.end (), [] (const SimReport &a, const SimReport &b) {
    return std::tie (a.topology, a.channel, a.vehicles) < std::tie (b.topology, b.channel, b.vehicles);
  });
}

std::string
render_table (std::span<const SimReport> rows)
{
  const bool timing = !rows.empty ()
                      && std::all_of (rows.begin (), rows.end (), [] (const SimReport &r) { return r.wall_time_s.has_value (); });
  std::string out = fmt::format ("{:<13} {:>8} {:<19} {:>8} {:>8} {:>8}", "topology", "vehicles", "channel",
                                 "CBP %", "PER %", "events");
  if (timing)
    out += fmt::format (" {:>10} {:>9}", "wall s", "realtime");
  out += '\n';
  for (const SimReport &r : rows)
    {
      if (r.no_traffic)
        out += fmt::format ("{:<13} {:>8} {:<19} {:>8} {:>8} {:>8}", r.topology, r.vehicles, r.channel, "-", "-",
                            "no traffic");
      else
        out += fmt::format ("{:<13} {:>8} {:<19} {:>8.2f} {:>8.2f} {:>8}", r.topology, r.vehicles, r.channel,
                            r.cbp_percent, r.per_percent, r.events);
      if (timing)
        out += fmt::format (" {:>10.3f} {:>9}", *r.wall_time_s, r.realtime_capable () ? "yes" : "no");
      out += '\n';
    }
  return out;
}

std::string
render_csv (std::span<const SimReport> rows)
{
  std::string out = "topology,vehicles,channel,seed,duration_s,cbp_percent,per_percent,per_pooled_percent,events,"
                    "generated,decoded,collided,below_sensitivity,own,expired,no_traffic\n";
  for (const SimReport &r : rows)
    {
      const PacketCounters &c = r.counters;
      out += fmt::format ("{},{},{},{},{},{:.6f},{:.6f},{:.6f},{},{},{},{},{},{},{},{}\n", r.topology, r.vehicles,
                          r.channel, r.seed, shortest (r.duration_s), r.cbp_percent, r.per_percent,
                          r.per_pooled_percent, r.events, c.generated, c.decoded, c.collided, c.below_sensitivity,
                          c.own, c.expired, r.no_traffic ? 1 : 0);
    }
  return out;
}

std::string
render_json (const SimReport &r)
{
  Json j{{"topology", r.topology},
         {"vehicles", r.vehicles},
         {"channel", r.channel},
         {"seed", r.seed},
         {"duration_s", r.duration_s},
         {"cbp_percent", r.cbp_percent},
         {"per_percent", r.per_percent},
         {"per_pooled_percent", r.per_pooled_percent},
         {"events", r.events},
         {"no_traffic", r.no_traffic},
         {"counters", counters_json (r.counters)}};
  if (r.wall_time_s)
    j["wall_time_s"] = *r.wall_time_s;
  if (r.p99_delivery_lag_s)
    j["p99_delivery_lag_s"] = *r.p99_delivery_lag_s;
  return j.dump (2) + "\n";
}

SimReport
parse_report_json (const std::string &text)
{
  try
    {
      const Json j = Json::parse (text);
      SimReport r;
      r.topology = j.at ("topology").get<std::string> ();
      r.vehicles = j.at ("vehicles").get<std::uint32_t> ();
      r.channel = j.at ("channel").get<std::string> ();
      r.seed = j.at ("seed").get<std::uint64_t> ();
      r.duration_s = j.at ("duration_s").get<double> ();
      r.cbp_percent = j.at ("cbp_percent").get<double> ();
      r.per_percent = j.at ("per_percent").get<double> ();
      r.per_pooled_percent = j.at ("per_pooled_percent").get<double> ();
      r.events = j.at ("events").get<std::uint64_t> ();
      r.no_traffic = j.at ("no_traffic").get<bool> ();
      r.counters = counters_from (j.at ("counters"));
      if (j.contains ("wall_time_s"))
        r.wall_time_s = j.at ("wall_time_s").get<double> ();
      if (j.contains ("p99_delivery_lag_s"))
        r.p99_delivery_lag_s = j.at ("p99_delivery_lag_s").get<double> ();
      return r;
    }
  catch (const nlohmann::json::exception &e)
    {
      throw ParseError (0, std::string ("summary json: ") + e.what ());
    }
}

std::string
format_seconds (SimTime t)
{
  const std::int64_t ps = t.count ();
  const char *sign = ps < 0 ? "-" : "";
  const std::uint64_t a = ps < 0 ? static_cast<std::uint64_t> (-(ps + 1)) + 1 : static_cast<std::uint64_t> (ps);
  const auto per = static_cast<std::uint64_t> (SimTime::kPerSecond);
  return fmt::format ("{}{}.{:012}", sign, a / per, a % per);
}

void
write_event_log (std::ostream &out, std::span<const TxEvent> events)
{
  out << "start_s,end_s,transmitter_id,outcome,winner_id,n_colliders,hv_distance_m\n";
  for (const TxEvent &ev : events)
    out << fmt::format ("{},{},{},{},{},{},{:.3f}\n", format_seconds (ev.start), format_seconds (ev.end),
                        ev.transmitter_id (), to_string (ev.outcome),
                        ev.winner_id ? std::to_string (*ev.winner_id) : std::string (), ev.n_colliders (),
                        ev.hv_distance_m);
}

void
write_cbp_csv (std::ostream &out, const CbpSeries &cbp)
{
  out << "t_start_s,busy_fraction\n";
  for (const CbpSample &s : cbp.samples)
    out << fmt::format ("{},{:.9f}\n", shortest (s.t_start_s), s.busy_fraction);
}

void
write_per_csv (std::ostream &out, const PerHistogram &per)
{
  out << "d_lo_m,d_hi_m,sent,errors,per\n";
  for (const PerBin &b : per.bins)
    out << fmt::format ("{},{},{},{},{}\n", shortest (b.d_lo_m), shortest (b.d_hi_m), b.sent, b.errors,
                        b.per ? fmt::format ("{:.9f}", *b.per) : std::string ());
}

void
write_rss_csv (std::ostream &out, std::span<const RssPoint> curve)
{
  out << "distance_m,rss_dbm\n";
  for (const RssPoint &p : curve)
    out << fmt::format ("{},{}\n", shortest (p.distance_m), shortest (p.rss_dbm));
}

void
write_plot_csv (std::ostream &out, const CbpSeries &cbp, const PerHistogram &per, std::span<const RssPoint> curve)
{
  out << "series,x,y\n";
  for (const CbpSample &s : cbp.samples)
    out << fmt::format ("cbp,{},{:.9f}\n", shortest (s.t_start_s), s.busy_fraction);
  for (const PerBin &b : per.bins)
    if (b.per)
      out << fmt::format ("per,{},{:.9f}\n", shortest ((b.d_lo_m + b.d_hi_m) / 2.0), *b.per);
  for (const RssPoint &p : curve)
    out << fmt::format ("rss,{},{}\n", shortest (p.distance_m), shortest (p.rss_dbm));
}

} // namespace rtcsim
