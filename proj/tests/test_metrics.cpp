#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rtcsim/errors.hpp"
#include "rtcsim/metrics.hpp"

using namespace rtcsim;

namespace {

const SimTime kFrame = SimTime::us (496);

Transmission
member (std::uint32_t id, std::int64_t start_us, double dist, double rss = -60.0, bool from_hv = false)
{
  Transmission t;
  t.vehicle_id = id;
  t.start = SimTime::us (start_us);
  t.end = t.start + kFrame;
  t.gen_time = t.start;
  t.hv_distance_m = dist;
  t.rss_at_hv_dbm = rss;
  t.from_hv = from_hv;
  return t;
}

TxEvent
event (std::vector<Transmission> members, Outcome outcome, std::optional<std::uint32_t> winner = {})
{
  TxEvent ev;
  ev.start = members.front ().start;
  ev.end = members.front ().end;
  ev.hv_distance_m = members.front ().hv_distance_m;
  ev.members = std::move (members);
  ev.outcome = outcome;
  ev.winner_id = winner;
  return ev;
}

} // namespace

TEST_CASE ("CBP of an empty log is zero")
{
  const CbpSeries s = compute_cbp ({}, 1.0, RadioConfig{}, 0.1);
  CHECK (s.samples.size () == 10);
  CHECK (s.average == 0.0);
  for (const CbpSample &x : s.samples)
    CHECK (x.busy_fraction == 0.0);
}

TEST_CASE ("CBP with one frame per window")
{
  std::vector<TxEvent> log;
  for (int w = 0; w < 10; ++w)
    log.push_back (event ({member (1, w * 100'000 + 10, 50.0)}, Outcome::Decoded, 1));
  const CbpSeries s = compute_cbp (log, 1.0, RadioConfig{}, 0.1);
  for (const CbpSample &x : s.samples)
    CHECK (x.busy_fraction == doctest::Approx (0.00496).epsilon (1e-12));
  CHECK (s.average == doctest::Approx (0.00496).epsilon (1e-12));
  CHECK (s.samples[3].t_start_s == doctest::Approx (0.3));
}

TEST_CASE ("CBP takes the union of overlapping frames and skips unheard ones")
{
  // three overlapping frames, one frame below carrier sense, one straddling a window edge
  std::vector<TxEvent> log;
  log.push_back (event ({member (1, 0, 10.0), member (2, 2, 12.0), member (3, 300, 700.0, -80.0)}, Outcome::Collided));
  log.push_back (event ({member (4, 5000, 900.0, -97.0)}, Outcome::BelowSensitivity));
  log.push_back (event ({member (5, 99'800, 30.0)}, Outcome::Decoded, 5));

  const CbpSeries s = compute_cbp (log, 0.2, RadioConfig{}, 0.1);
  // discretise at 1 us and count busy ticks
  std::vector<int> busy (200'000, 0);
  for (const TxEvent &ev : log)
    for (const Transmission &m : ev.members)
      if (m.rss_at_hv_dbm >= -94.0)
        for (std::int64_t t = m.start.count () / 1'000'000; t < m.end.count () / 1'000'000; ++t)
          busy[static_cast<std::size_t> (t)] = 1;
  const double w0 = std::count (busy.begin (), busy.begin () + 100'000, 1) / 100'000.0;
  const double w1 = std::count (busy.begin () + 100'000, busy.end (), 1) / 100'000.0;
  CHECK (s.samples[0].busy_fraction == doctest::Approx (w0).epsilon (1e-12));
  CHECK (s.samples[1].busy_fraction == doctest::Approx (w1).epsilon (1e-12));
  CHECK (s.samples[0].busy_fraction == doctest::Approx ((796 + 200) / 1e5));
  CHECK (s.average == doctest::Approx ((w0 + w1) / 2));
}

TEST_CASE ("a trailing partial window is normalised by its own length")
{
  std::vector<TxEvent> log{event ({member (1, 100'000, 10.0)}, Outcome::Decoded, 1)};
  const CbpSeries s = compute_cbp (log, 0.15, RadioConfig{}, 0.1);
  REQUIRE (s.samples.size () == 2);
  CHECK (s.samples[1].busy_fraction == doctest::Approx (496e-6 / 0.05));
  CHECK (s.average == doctest::Approx (496e-6 / 0.15));
  CHECK_THROWS_AS (compute_cbp (log, 0.0, RadioConfig{}, 0.1), ValidationError);
  CHECK_THROWS_AS (compute_cbp (log, 1.0, RadioConfig{}, -1.0), ValidationError);
}

TEST_CASE ("PER partitions RV packets by distance")
{
  RunResult r;
  r.events.push_back (event ({member (1, 0, 10.0)}, Outcome::Decoded, 1));
  r.events.push_back (event ({member (2, 1000, 30.0), member (3, 1002, 40.0)}, Outcome::Collided));
  r.events.push_back (event ({member (4, 2000, 30.0), member (5, 2001, 390.0)}, Outcome::Decoded, 4));
  r.events.push_back (event ({member (0, 3000, 0.0, 1e9, true)}, Outcome::Own));
  r.events.push_back (event ({member (6, 4000, 600.0)}, Outcome::BelowSensitivity));
  r.expired.push_back ({7, 0, 12.0, false});
  r.expired.push_back ({0, 1, 0.0, true});

  const PerHistogram h = compute_per (r, 25.0, 400.0);
  REQUIRE (h.bins.size () == 16);
  // [0,25): 1 ok, 1 expired; [25,50): 30 err, 40 err, 30 ok; [375,400): 390 err; 600 m is out of range
  CHECK (h.bins[0].sent == 2);
  CHECK (h.bins[0].errors == 1);
  CHECK (h.bins[1].sent == 3);
  CHECK (h.bins[1].errors == 2);
  CHECK (h.bins[15].sent == 1);
  CHECK (h.bins[15].errors == 1);
  CHECK_FALSE (h.bins[5].per.has_value ());
  std::uint64_t sent = 0;
  for (const PerBin &b : h.bins)
    sent += b.sent;
  CHECK (sent == 6);
  CHECK (h.average == doctest::Approx ((0.5 + 2.0 / 3.0 + 1.0) / 3.0));
  CHECK (h.pooled == doctest::Approx (4.0 / 6.0));
}

TEST_CASE ("PER extremes")
{
  RunResult good, bad;
  for (int i = 0; i < 20; ++i)
    {
      good.events.push_back (event ({member (1, i * 1000, 20.0 * i)}, Outcome::Decoded, 1));
      bad.events.push_back (
          event ({member (1, i * 1000, 20.0 * i), member (2, i * 1000 + 1, 20.0 * i)}, Outcome::Collided));
    }
  CHECK (compute_per (good, 25.0, 400.0).average == 0.0);
  CHECK (compute_per (bad, 25.0, 400.0).average == 1.0);
  CHECK (compute_per (bad, 25.0, 400.0).pooled == 1.0);
  CHECK_THROWS_AS (compute_per (good, 0.0, 400.0), ValidationError);
  // uneven last bin
  CHECK (compute_per (good, 30.0, 100.0).bins.back ().d_hi_m == 100.0);
}

TEST_CASE ("RSS curve")
{
  const RadioConfig radio;
  const PathLossModel m = PathLossModel::default_three_log_distance ();
  const auto c = rss_curve (radio, m, 1.0, 1000.0, 1.0);
  REQUIRE (c.size () == 1000);
  CHECK (c.front ().distance_m == 1.0);
  CHECK (c.back ().distance_m == 1000.0);
  for (const RssPoint &p : c)
    CHECK (p.rss_dbm == rss_dbm (radio, m, p.distance_m));
  CHECK (rss_curve (radio, m, 0.0, 1.0, 0.3).size () == 4);
  CHECK_THROWS_AS (rss_curve (radio, m, 5.0, 1.0, 1.0), ValidationError);
  CHECK_THROWS_AS (rss_curve (radio, m, 0.0, 1.0, 0.0), ValidationError);
}

TEST_CASE ("summaries, tables and JSON")
{
  RunResult r;
  r.events.push_back (event ({member (1, 0, 10.0)}, Outcome::Decoded, 1));
  r.counters.generated = 1;
  r.counters.decoded = 1;
  RunStats stats;
  stats.sim_duration_s = 1.0;
  const CbpSeries cbp = compute_cbp (r.events, 1.0, RadioConfig{}, 0.1);
  const PerHistogram per = compute_per (r, 25.0, 400.0);
  const SimReport a = summarize (r, cbp, per, stats, "disk", 2, "fowlerville", 9);
  CHECK (a.cbp_percent == doctest::Approx (0.0496));
  CHECK (a.per_percent == 0.0);
  CHECK_FALSE (a.no_traffic);
  CHECK_FALSE (a.wall_time_s.has_value ());

  const SimReport empty = summarize (RunResult{}, compute_cbp ({}, 1.0, RadioConfig{}, 0.1),
                                     compute_per (RunResult{}, 25.0, 400.0), stats, "linear", 1, "three_log", 9);
  CHECK (empty.no_traffic);
  CHECK (render_table (std::vector<SimReport>{empty}).find ("no traffic") != std::string::npos);

  const SimReport back = parse_report_json (render_json (a));
  CHECK (back.topology == "disk");
  CHECK (back.vehicles == 2);
  CHECK (back.seed == 9);
  CHECK (back.cbp_percent == doctest::Approx (a.cbp_percent));
  CHECK (back.counters == a.counters);
  CHECK_THROWS_AS (parse_report_json ("{"), ParseError);

  std::vector<SimReport> rows{a, empty, a};
  rows[2].vehicles = 1;
  sort_reports (rows);
  CHECK (rows[0].vehicles == 1);
  CHECK (rows[1].vehicles == 2);
  CHECK (rows[2].topology == "linear");
  const std::string csv = render_csv (rows);
  CHECK (std::count (csv.begin (), csv.end (), '\n') == 4);
}

TEST_CASE ("time and event log formatting")
{
  CHECK (format_seconds (SimTime::us (496)) == "0.000496000000");
  CHECK (format_seconds (SimTime::seconds (19.92)) == "19.920000000000");
  CHECK (format_seconds (SimTime::ps (-1)) == "-0.000000000001");

  std::ostringstream s;
  const std::vector<TxEvent> log{event ({member (3, 1, 12.5), member (4, 2, 80.0)}, Outcome::Collided)};
  write_event_log (s, log);
  CHECK (s.str ()
         == "start_s,end_s,transmitter_id,outcome,winner_id,n_colliders,hv_distance_m\n"
            "0.000001000000,0.000497000000,3,collided,,1,12.500\n");
}
