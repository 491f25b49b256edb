// Acceptance checks AC1-AC8. Prints one PASS/FAIL line per criterion and
// exits non-zero when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "oracle.hpp"
#include "rtcsim/errors.hpp"
#include "rtcsim/metrics.hpp"
#include "rtcsim/realtime.hpp"
#include "support.hpp"

using namespace rtcsim;
using Clock = std::chrono::steady_clock;

namespace {

double
since (Clock::time_point t0)
{
  return std::chrono::duration<double> (Clock::now () - t0).count ();
}

struct Verdict
{
  bool pass = true;
  std::string detail;
};

std::string
log_text (std::span<const TxEvent> events)
{
  std::ostringstream s;
  write_event_log (s, events);
  return s.str ();
}

bool
same_events (const std::vector<TxEvent> &a, const std::vector<TxEvent> &b)
{
  if (a.size () != b.size ())
    return false;
  for (std::size_t i = 0; i < a.size (); ++i)
    {
      if (a[i].start != b[i].start || a[i].end != b[i].end || a[i].outcome != b[i].outcome
          || a[i].winner_id != b[i].winner_id || a[i].members.size () != b[i].members.size ())
        return false;
      for (std::size_t k = 0; k < a[i].members.size (); ++k)
        if (a[i].members[k].vehicle_id != b[i].members[k].vehicle_id || a[i].members[k].seq != b[i].members[k].seq
            || a[i].members[k].start != b[i].members[k].start)
          return false;
    }
  return true;
}

// Invariant failures anywhere count against AC8.
int g_invariant_failures = 0;
int g_invariant_checks = 0;

void
audit (const RunResult &r, const MacParams &mac, const RadioConfig &radio, const PathLossModel &model)
{
  ++g_invariant_checks;
  try
    {
      check_invariants (r, mac, radio, model);
    }
  catch (const InvariantError &e)
    {
      ++g_invariant_failures;
      std::fprintf (stderr, "invariant: %s\n", e.what ());
    }
}

Verdict
ac1 ()
{
  const RadioConfig radio;
  const MacParams mac;
  const PathLossModel model = PathLossModel::default_three_log_distance ();
  const auto t0 = Clock::now ();
  int mismatches = 0;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed)
    {
      test::Instance a = test::random_instance (seed, radio, model);
      test::Instance b = test::random_instance (seed, radio, model);
      const RunResult got = run (a.plan, mac, radio, model, a.table);
      const oracle::Result want = oracle::replay (b.plan, mac, radio, model, b.table, SimTime::us (1));
      std::vector<std::pair<std::uint32_t, std::uint32_t>> expired;
      for (const ExpiredPacket &e : got.expired)
        expired.emplace_back (e.vehicle_id, e.seq);
      std::sort (expired.begin (), expired.end ());
      if (!same_events (got.events, want.events) || expired != want.expired)
        {
          ++mismatches;
          std::fprintf (stderr, "AC1 mismatch at seed %llu\n", static_cast<unsigned long long> (seed));
        }
    }
  const double secs = since (t0);
  return {mismatches == 0 && secs < 60.0, fmt::format ("1000 instances, {} mismatches, {:.2f} s", mismatches, secs)};
}

Verdict
ac2 ()
{
  const MacParams p;
  const SimTime pd = p.pd, tx = p.tx_interval, aifs = p.aifs (), e = SimTime::ps (1);
  using S = OverlapState;
  struct Case
  {
    SimTime diff;
    bool hidden;
    S want;
  };
  const Case cases[] = {
      {pd - e, false, S::A1_CollisionPD},          {pd, false, S::A1_CollisionPD},
      {pd + e, false, S::B_Backoff},               {tx - e, false, S::B_Backoff},
      {tx, false, S::B_Backoff},                   {tx + e, false, S::C_AifsWaiting},
      {tx + aifs - e, false, S::C_AifsWaiting},    {tx + aifs, false, S::C_AifsWaiting},
      {tx + aifs + e, false, S::D_PostTransmission}, {pd - e, true, S::A2_CollisionHN},
      {pd, true, S::A2_CollisionHN},               {pd + e, true, S::A2_CollisionHN},
      {tx, true, S::A2_CollisionHN},               {tx + e, true, S::C_AifsWaiting},
      {tx + aifs, true, S::C_AifsWaiting},         {tx + aifs + e, true, S::D_PostTransmission},
  };
  int wrong = 0;
  for (const Case &c : cases)
    wrong += classify (c.diff, pd, tx, aifs, c.hidden) != c.want;
  for (bool hidden : {false, true})
    try
      {
        classify (SimTime{} - e, pd, tx, aifs, hidden);
        ++wrong;
      }
    catch (const InvariantError &)
      {
      }
  return {wrong == 0, fmt::format ("{} boundary cases, {} wrong", std::size (cases) + 2, wrong)};
}

Verdict
ac3 ()
{
  const RadioConfig radio;
  const PathLossModel m = PathLossModel::default_three_log_distance ();
  const auto curve = rss_curve (radio, m, 0.1, 1000.0, 0.1);
  auto closed = [] (double d) {
    double l = 46.6777;
    if (d > 1.0)
      l += 19.0 * std::log10 (std::min (d, 200.0));
    if (d > 200.0)
      l += 38.0 * std::log10 (std::min (d, 500.0) / 200.0);
    if (d > 500.0)
      l += 38.0 * std::log10 (d / 500.0);
    return 20.0 - l;
  };
  double worst = 0.0;
  bool monotone = true;
  for (std::size_t i = 0; i < curve.size (); ++i)
    {
      worst = std::max (worst, std::abs (curve[i].rss_dbm - closed (curve[i].distance_m)));
      if (i > 0 && curve[i].rss_dbm > curve[i - 1].rss_dbm)
        monotone = false;
    }
  // per-decade slope inside each segment
  auto slope = [&] (double a, double b) { return (rss_dbm (radio, m, b) - rss_dbm (radio, m, a)) / std::log10 (b / a); };
  const double s1 = slope (10.0, 150.0), s2 = slope (250.0, 450.0), s3 = slope (600.0, 1000.0);
  const bool slopes = std::abs (s1 + 19.0) < 1e-9 && std::abs (s2 + 38.0) < 1e-9 && std::abs (s3 + 38.0) < 1e-9;
  return {curve.size () == 10000 && worst < 1e-9 && monotone && slopes,
          fmt::format ("{} distances, max error {:.2e} dB, monotone {}, slopes {:.1f}/{:.1f}/{:.1f} dB/decade",
                       curve.size (), worst, monotone, s1, s2, s3)};
}

const std::vector<std::uint64_t> kSeeds{1, 2, 3, 7, 42, 99};
const std::vector<std::uint32_t> kDensities{100, 500, 1000};

struct DensityResult
{
  double cbp = 0.0; ///< percent, mean over seeds
  double per = 0.0;
  std::vector<std::uint64_t> sent50, errors50; ///< pooled over seeds, 50 m bins
};

struct Batch
{
  std::map<std::uint32_t, DensityResult> by_density;
  double worst_triple_s = 0.0;
  double worst_1000_s = 0.0;
};

Batch
disk_runs ()
{
  const RadioConfig radio;
  const MacParams mac;
  const PathLossModel model = PathLossModel::default_fowlerville ();
  Batch b;
  for (std::uint32_t n : kDensities)
    {
      b.by_density[n].sent50.assign (8, 0);
      b.by_density[n].errors50.assign (8, 0);
    }
  for (std::uint64_t seed : kSeeds)
    {
      double triple = 0.0;
      for (std::uint32_t n : kDensities)
        {
          TopologySpec spec;
          spec.vehicle_count = n;
          const Scenario s = generate_topology (spec, 20.0, 20.0, seed);
          const auto t0 = Clock::now ();
          const RunResult r = run (s, model, radio, mac, true);
          const double secs = since (t0);
          triple += secs;
          if (n == 1000)
            b.worst_1000_s = std::max (b.worst_1000_s, secs);
          RunResult audited = run (s, model, radio, mac, true, SchedulerOptions{true});
          audit (audited, mac, radio, model);

          DensityResult &d = b.by_density[n];
          d.cbp += 100.0 * compute_cbp (r.events, s.duration_s, radio, 0.1).average / kSeeds.size ();
          d.per += 100.0 * compute_per (r, 25.0, 400.0).average / kSeeds.size ();
          const PerHistogram h50 = compute_per (r, 50.0, 400.0);
          for (std::size_t i = 0; i < 8; ++i)
            {
              d.sent50[i] += h50.bins[i].sent;
              d.errors50[i] += h50.bins[i].errors;
            }
        }
      b.worst_triple_s = std::max (b.worst_triple_s, triple);
    }
  return b;
}

Verdict
ac4 (const Batch &b)
{
  const double c1 = b.by_density.at (100).cbp, c5 = b.by_density.at (500).cbp, c10 = b.by_density.at (1000).cbp;
  const bool bands = c1 >= 44 && c1 <= 60 && c5 >= 85 && c5 <= 96 && c10 >= 85 && c10 <= 96;
  const bool order = c1 < c5 && c5 <= c10 + 1.0;
  return {bands && order && b.worst_triple_s < 30.0,
          fmt::format ("CBP {:.2f} / {:.2f} / {:.2f} %, mean of seeds {{1,2,3,7,42,99}}; slowest triple {:.2f} s", c1,
                       c5, c10, b.worst_triple_s)};
}

Verdict
ac5 (const Batch &b)
{
  const double p1 = b.by_density.at (100).per, p10 = b.by_density.at (1000).per;
  const DensityResult &d = b.by_density.at (1000);
  std::vector<double> per;
  for (std::size_t i = 0; i < d.sent50.size (); ++i)
    if (d.sent50[i] > 0)
      per.push_back (static_cast<double> (d.errors50[i]) / static_cast<double> (d.sent50[i]));
  int inversions = 0;
  for (std::size_t i = 1; i < per.size (); ++i)
    inversions += per[i] < per[i - 1];
  return {p1 <= 5.0 && p10 >= 80 && p10 <= 95 && inversions <= 1,
          fmt::format ("PER(100) {:.2f} %, PER(1000) {:.2f} %, 50 m bins at 1000 with {} inversion(s)", p1, p10,
                       inversions)};
}

struct Paced
{
  RealtimeRun run;
  double p99_ms = 0.0;
};

Paced
paced_100 ()
{
  TopologySpec spec;
  spec.vehicle_count = 100;
  const Scenario s = generate_topology (spec, 20.0, 20.0, 42);
  NullSink sink;
  RealtimeOptions opt;
  opt.speed = 1.0;
  Paced p{run_realtime (s, PathLossModel::default_fowlerville (), RadioConfig{}, MacParams{}, sink, opt), 0.0};
  p.p99_ms = 1e3 * p.run.stats.p99_delivery_lag_s.value_or (0.0);
  audit (p.run.result, MacParams{}, RadioConfig{}, PathLossModel::default_fowlerville ());
  return p;
}

Verdict
ac6 (const Batch &b, const Paced &p)
{
  const bool ok = b.worst_1000_s < 20.0 && !p.run.violation && p.run.stats.realtime_violations == 0 && p.p99_ms < 10.0;
  return {ok, fmt::format ("1000-vehicle batch {:.2f} s (slowest seed); paced 100-vehicle run p99 lag {:.3f} ms, {} "
                           "violations, wall {:.2f} s",
                           b.worst_1000_s, p.p99_ms, p.run.stats.realtime_violations, p.run.stats.wall_time_s)};
}

std::string
report_of (const RunResult &r, const Scenario &s)
{
  const RadioConfig radio;
  RunStats stats;
  stats.sim_duration_s = s.duration_s;
  stats.counters = r.counters;
  const SimReport rep = summarize (r, compute_cbp (r.events, s.duration_s, radio, 0.1), compute_per (r, 25.0, 400.0),
                                   stats, "disk", static_cast<std::uint32_t> (s.vehicle_count ()), "fowlerville",
                                   s.seed);
  return render_json (rep);
}

Verdict
ac7 (const Paced &first)
{
  const RadioConfig radio;
  const MacParams mac;
  const PathLossModel model = PathLossModel::default_fowlerville ();
  TopologySpec spec;
  spec.vehicle_count = 500;
  const Scenario s = generate_topology (spec, 20.0, 20.0, 42);
  const RunResult a = run (s, model, radio, mac, true);
  const RunResult b = run (s, model, radio, mac, true);
  const bool batch = log_text (a.events) == log_text (b.events) && report_of (a, s) == report_of (b, s);

  const Paced second = paced_100 ();
  TopologySpec spec100;
  spec100.vehicle_count = 100;
  const Scenario s100 = generate_topology (spec100, 20.0, 20.0, 42);
  const bool paced = !first.run.violation && !second.run.violation
                     && log_text (first.run.result.events) == log_text (second.run.result.events)
                     && report_of (first.run.result, s100) == report_of (second.run.result, s100);
  return {batch && paced, fmt::format ("batch logs and reports identical: {}; real-time identical: {}", batch, paced)};
}

} // namespace

int
main ()
{
  int failures = 0;
  auto emit = [&] (const char *id, const char *name, const Verdict &v) {
    std::printf ("%s %s %s: %s\n", id, v.pass ? "PASS" : "FAIL", name, v.detail.c_str ());
    std::fflush (stdout);
    failures += !v.pass;
  };
  auto guarded = [] (const std::function<Verdict ()> &f) {
    try
      {
        return f ();
      }
    catch (const std::exception &e)
      {
        return Verdict{false, std::string ("exception: ") + e.what ()};
      }
  };

  emit ("AC1", "oracle equivalence", guarded (ac1));
  emit ("AC2", "state boundaries", guarded (ac2));
  emit ("AC3", "RSS closed form", guarded (ac3));

  Batch b;
  Verdict batch_error{true, {}};
  try
    {
      b = disk_runs ();
    }
  catch (const std::exception &e)
    {
      batch_error = {false, std::string ("exception: ") + e.what ()};
    }
  emit ("AC4", "CBP density trend", batch_error.pass ? guarded ([&] { return ac4 (b); }) : batch_error);
  emit ("AC5", "PER trends", batch_error.pass ? guarded ([&] { return ac5 (b); }) : batch_error);

  Paced p;
  Verdict paced_error{true, {}};
  try
    {
      p = paced_100 ();
    }
  catch (const std::exception &e)
    {
      paced_error = {false, std::string ("exception: ") + e.what ()};
    }
  emit ("AC6", "real-time performance",
        batch_error.pass && paced_error.pass ? guarded ([&] { return ac6 (b, p); })
                                             : (batch_error.pass ? paced_error : batch_error));
  emit ("AC7", "determinism", paced_error.pass ? guarded ([&] { return ac7 (p); }) : paced_error);
  emit ("AC8", "invariants",
        {g_invariant_failures == 0 && g_invariant_checks > 0,
         fmt::format ("{} audited runs, {} violations", g_invariant_checks, g_invariant_failures)});
  return failures == 0 ? 0 : 1;
}
