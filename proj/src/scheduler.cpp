#include "rtcsim/scheduler.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include <fmt/format.h>

#include "rtcsim/errors.hpp"
#include "rtcsim/kernels.hpp"

namespace rtcsim {

namespace {

Transmission
to_transmission (const Packet &p)
{
  Transmission t;
  t.vehicle_id = p.vehicle_id;
  t.seq = p.seq;
  t.gen_time = p.gen_time;
  t.start = p.sched_time;
  t.end = p.sched_time + p.duration;
  t.position = p.tx_position;
  t.speed_mps = p.speed_mps;
  t.heading_rad = p.heading_rad;
  t.hv_distance_m = p.hv_distance_m;
  t.rss_at_hv_dbm = p.rss_at_hv_dbm;
  t.from_hv = p.from_hv;
  return t;
}

bool
overlaps (const Transmission &a, const Transmission &b)
{
  return a.start <= b.end && b.start <= a.end;
}

std::string
describe (const Transmission &t)
{
  return fmt::format ("vehicle {} seq {} [{} ps, {} ps]", t.vehicle_id, t.seq, t.start.count (), t.end.count ());
}

} // namespace

std::size_t
PacketPlan::packet_count () const
{
  std::size_t n = 0;
  for (const auto &v : vehicles)
    n += v.packets.size ();
  return n;
}

PacketPlan
build_plan (const Scenario &scenario, const PathLossModel &model, const RadioConfig &radio,
            const MacParams &params, bool hv_transmits)
{
  scenario.validate ();
  radio.validate ();
  params.validate ();

  PacketPlan plan;
  plan.horizon = SimTime::seconds (scenario.duration_s);
  if (scenario.rv_traces.empty ())
    return plan;

  std::vector<const MobilityTrace *> traces;
  if (hv_transmits)
    traces.push_back (&scenario.hv_trace);
  for (const auto &t : scenario.rv_traces)
    traces.push_back (&t);

  // Positions first, then one batched distance + path-loss pass over all packets.
  std::vector<double> ax, ay, bx, by;
  for (const MobilityTrace *trace : traces)
    {
      VehicleSchedule vs;
      vs.vehicle_id = trace->vehicle_id;
      vs.is_hv = trace == &scenario.hv_trace;
      const std::vector<SimTime> gens = generation_schedule (*trace, scenario.duration_s);
      vs.packets.reserve (gens.size ());
      for (std::size_t i = 0; i < gens.size (); ++i)
        {
          const double t = gens[i].to_seconds ();
          const KinematicState s = state_at (*trace, t);
          const Point hv = position_at (scenario.hv_trace, t);
          PlannedPacket pp;
          pp.seq = static_cast<std::uint32_t> (i);
          pp.gen_time = gens[i];
          pp.position = s.position;
          pp.speed_mps = static_cast<float> (s.speed_mps);
          pp.heading_rad = static_cast<float> (s.heading_rad);
          vs.packets.push_back (pp);
          ax.push_back (s.position.x_m);
          ay.push_back (s.position.y_m);
          bx.push_back (hv.x_m);
          by.push_back (hv.y_m);
        }
      plan.vehicles.push_back (std::move (vs));
    }

  std::vector<double> dist (ax.size ()), loss (ax.size ());
  kernels::distance (ax, ay, bx, by, dist);
  model.loss_db (dist, loss);

  std::size_t k = 0;
  for (auto &vs : plan.vehicles)
    for (auto &pp : vs.packets)
      {
        if (vs.is_hv)
          {
            pp.hv_distance_m = 0.0;
            // the HV cannot receive while it transmits
            pp.rss_at_hv_dbm = std::numeric_limits<double>::infinity ();
          }
        else
          {
            pp.hv_distance_m = dist[k];
            pp.rss_at_hv_dbm = radio.tx_power_dbm - loss[k];
          }
        ++k;
      }
  return plan;
}

std::string_view
to_string (Outcome o)
{
  switch (o)
    {
    case Outcome::Decoded:
      return "decoded";
    case Outcome::Collided:
      return "collided";
    case Outcome::BelowSensitivity:
      return "below_sensitivity";
    case Outcome::Own:
      return "own";
    }
  return "collided";
}

const Transmission *
TxEvent::winner () const
{
  if (!winner_id)
    return nullptr;
  for (const auto &m : members)
    if (m.vehicle_id == *winner_id)
      return &m;
  return nullptr;
}

bool
PacketQueue::Later::operator() (const Packet &a, const Packet &b) const
{
  if (a.sched_time != b.sched_time)
    return a.sched_time > b.sched_time;
  if (a.vehicle_id != b.vehicle_id)
    return a.vehicle_id > b.vehicle_id;
  return a.seq > b.seq;
}

Packet
PacketQueue::pop ()
{
  Packet p = m_heap.top ();
  m_heap.pop ();
  return p;
}

PacketQueue
init_queue (const PacketPlan &plan, const MacParams &params)
{
  if (plan.vehicles.empty ())
    throw ValidationError ("init_queue: no vehicles");
  PacketQueue q;
  for (const auto &v : plan.vehicles)
    {
      if (v.packets.empty ())
        continue;
      const PlannedPacket &pp = v.packets.front ();
      Packet p;
      p.vehicle_id = v.vehicle_id;
      p.seq = pp.seq;
      p.gen_time = pp.gen_time;
      p.sched_time = pp.gen_time;
      p.duration = params.tx_interval;
      p.tx_position = pp.position;
      p.speed_mps = pp.speed_mps;
      p.heading_rad = pp.heading_rad;
      p.hv_distance_m = pp.hv_distance_m;
      p.rss_at_hv_dbm = pp.rss_at_hv_dbm;
      p.from_hv = v.is_hv;
      q.push (p);
    }
  return q;
}

Scheduler::Scheduler (const PacketPlan &plan, const MacParams &params, const RadioConfig &radio,
                      const PathLossModel &model, BackoffSource &backoff, SchedulerOptions options)
  : m_plan (plan),
    m_params (params),
    m_radio (radio),
    m_model (model),
    m_backoff (backoff),
    m_options (options)
{
  m_params.validate ();
  m_radio.validate ();
  for (std::size_t v = 0; v < plan.vehicles.size (); ++v)
    {
      const VehicleSchedule &vs = plan.vehicles[v];
      if (!m_vehicle_index.emplace (vs.vehicle_id, v).second)
        throw ValidationError ("plan: duplicate vehicle id " + std::to_string (vs.vehicle_id));
      for (std::size_t i = 0; i < vs.packets.size (); ++i)
        {
          if (vs.packets[i].seq != i)
            throw ValidationError ("plan: packet seq must equal its index");
          if (i > 0 && !(vs.packets[i - 1].gen_time < vs.packets[i].gen_time))
            throw ValidationError ("plan: generation times must increase");
        }
    }
  if (!plan.vehicles.empty ())
    m_queue = init_queue (plan, m_params);
  m_counters.generated = plan.packet_count ();
  m_counters.queued = m_counters.generated;
}

Packet
Scheduler::make_packet (std::size_t vehicle, std::size_t index, SimTime earliest) const
{
  const VehicleSchedule &vs = m_plan.vehicles[vehicle];
  const PlannedPacket &pp = vs.packets[index];
  Packet p;
  p.vehicle_id = vs.vehicle_id;
  p.seq = pp.seq;
  p.gen_time = pp.gen_time;
  p.sched_time = std::max (pp.gen_time, earliest);
  p.duration = m_params.tx_interval;
  p.tx_position = pp.position;
  p.speed_mps = pp.speed_mps;
  p.heading_rad = pp.heading_rad;
  p.hv_distance_m = pp.hv_distance_m;
  p.rss_at_hv_dbm = pp.rss_at_hv_dbm;
  p.from_hv = vs.is_hv;
  return p;
}

void
Scheduler::insert_successor (const Packet &p)
{
  ++m_processed;
  m_counters.queued = m_counters.generated - m_processed;
  const std::size_t v = m_vehicle_index.at (p.vehicle_id);
  const std::size_t next = static_cast<std::size_t> (p.seq) + 1;
  if (next < m_plan.vehicles[v].packets.size ())
    // one radio per vehicle: the next BSM waits for the previous frame and its AIFS
    m_queue.push (make_packet (v, next, p.sched_time + p.duration + m_params.aifs ()));
}

bool
Scheduler::hidden (Point a, Point b) const
{
  return is_hidden (m_radio, m_model, a, b);
}

void
Scheduler::prune (SimTime now)
{
  // a countdown resumed at most cw_max slots before `now` still needs the
  // transmissions whose AIFS reaches past its start
  const SimTime keep = m_params.aifs () + m_params.slot_time * m_params.cw_max;
  while (!m_recent.empty ())
    {
      const Transmission &f = m_recent.front ();
      if (f.end + keep >= now)
        break;
      if (!m_open.empty () && f.end >= m_open.front ().members.front ().start)
        break;
      m_recent.pop_front ();
    }
}

void
Scheduler::transmit (const Packet &p)
{
  const Transmission t = to_transmission (p);
  m_recent.push_back (t);
  if (m_options.record_transmissions)
    m_record.push_back (t);
  ++m_counters.transmissions;

  if (!m_open.empty () && t.start <= m_open.back ().members.front ().end)
    {
      OpenEvent &ev = m_open.back ();
      const Transmission &opener = ev.members.front ();
      const double d = distance (opener.position, t.position);
      const OverlapState s = classify (t.start - opener.start, m_params.propagation_delay (d),
                                       opener.end - opener.start, m_params.aifs (), hidden (opener.position, t.position));
      if (s != OverlapState::A1_CollisionPD && s != OverlapState::A2_CollisionHN)
        throw InvariantError ("transmission " + describe (t) + " overlaps audible " + describe (opener));
      ev.members.push_back (t);
      ev.max_end = std::max (ev.max_end, t.end);
    }
  else
    {
      m_open.push_back (OpenEvent{{t}, t.end});
    }
  insert_successor (p);
}

void
Scheduler::expire (const Packet &p)
{
  ++m_counters.expired;
  m_expired.push_back ({p.vehicle_id, p.seq, p.hv_distance_m, p.from_hv});
  insert_successor (p);
}

TxEvent
Scheduler::finalize (OpenEvent &&open)
{
  TxEvent ev;
  ev.members = std::move (open.members);
  const Transmission &opener = ev.members.front ();
  ev.start = opener.start;
  ev.end = opener.end;
  ev.hv_distance_m = opener.hv_distance_m;

  std::size_t strongest = 0;
  for (std::size_t i = 1; i < ev.members.size (); ++i)
    if (ev.members[i].rss_at_hv_dbm > ev.members[strongest].rss_at_hv_dbm)
      strongest = i;
  const Transmission &star = ev.members[strongest];

  if (ev.members.size () == 1 && opener.from_hv)
    {
      ev.outcome = Outcome::Own;
      ++m_counters.own;
      return ev;
    }

  // Everything on air at the HV during the strongest member, this event's
  // members included. Keys index m_recent.
  std::vector<Arrival> arrivals;
  std::size_t star_key = m_recent.size ();
  for (std::size_t i = 0; i < m_recent.size (); ++i)
    {
      const Transmission &q = m_recent[i];
      if (!overlaps (q, star))
        continue;
      if (q.vehicle_id == star.vehicle_id && q.seq == star.seq)
        star_key = i;
      arrivals.push_back ({i, q.rss_at_hv_dbm});
    }
  if (star_key == m_recent.size ())
    throw InvariantError ("finalize: strongest member " + describe (star) + " no longer tracked");

  const std::optional<std::size_t> w = resolve_capture (m_radio, arrivals);
  if (w && *w == star_key && !star.from_hv)
    {
      ev.outcome = Outcome::Decoded;
      ev.winner_id = star.vehicle_id;
    }
  else if (arrivals.size () == 1)
    ev.outcome = Outcome::BelowSensitivity;
  else
    ev.outcome = Outcome::Collided;

  for (std::size_t i = 0; i < ev.members.size (); ++i)
    {
      if (ev.outcome == Outcome::Decoded && i == strongest)
        ++m_counters.decoded;
      else if (ev.members[i].from_hv)
        ++m_counters.own;
      else if (ev.outcome == Outcome::BelowSensitivity)
        ++m_counters.below_sensitivity;
      else
        ++m_counters.collided;
    }
  return ev;
}

void
Scheduler::sense_and_act (Packet &p)
{
  const SimTime t = p.sched_time;
  const SimTime aifs = m_params.aifs ();
  const bool counting = p.countdown_start.has_value ();
  const SimTime floor = counting ? *p.countdown_start : t;

  // Audible transmissions that keep the medium blocked for p somewhere at or
  // after `floor`: busy from start + PD, then the AIFS that follows.
  m_blockers.clear ();
  for (const Transmission &q : m_recent)
    {
      if (q.end + aifs <= floor)
        continue;
      // hidden transmitters never block p: A2 inside their frame, unheard after it
      if (hidden (q.position, p.tx_position))
        continue;
      const SimTime pd = m_params.propagation_delay (distance (q.position, p.tx_position));
      const OverlapState st = classify (t - q.start, pd, q.end - q.start, aifs, false);
      m_blockers.push_back ({q.start + pd, q.end + aifs, q.end, st});
    }

  // End of the blocked stretch entered at x (frame end, AIFS excluded).
  auto stretch_end = [&] (SimTime x) {
    SimTime hi = x;
    SimTime end = x;
    for (const Blocker &b : m_blockers)
      if (b.lo <= x && x < b.hi && b.hi > hi)
        {
          hi = b.hi;
          end = b.frame_end;
        }
    for (bool grew = true; grew;)
      {
        grew = false;
        for (const Blocker &b : m_blockers)
          if (b.lo < hi && b.hi > hi)
            {
              hi = b.hi;
              end = b.frame_end;
              grew = true;
            }
      }
    return end;
  };

  if (counting)
    {
      bool blocked = false;
      SimTime x;
      for (const Blocker &b : m_blockers)
        if (b.lo < t)
          {
            const SimTime xb = std::max (b.lo, floor);
            x = blocked ? std::min (x, xb) : xb;
            blocked = true;
          }
      if (!blocked)
        {
          transmit (p);
          return;
        }
      apply_backoff (p, m_backoff, m_params, stretch_end (x), x);
      ++m_counters.backoffs;
      m_queue.push (p);
      return;
    }

  bool busy = false;
  bool waiting = false;
  SimTime aifs_end;
  for (const Blocker &b : m_blockers)
    {
      if (b.state == OverlapState::B_Backoff)
        busy = true;
      else if (b.state == OverlapState::C_AifsWaiting && b.hi > t)
        {
          aifs_end = waiting ? std::max (aifs_end, b.frame_end) : b.frame_end;
          waiting = true;
        }
    }
  if (busy)
    {
      apply_backoff (p, m_backoff, m_params, stretch_end (t), t);
      ++m_counters.backoffs;
      m_queue.push (p);
    }
  else if (waiting)
    {
      reschedule_after_aifs (p, aifs_end, m_params);
      ++m_counters.aifs_deferrals;
      m_queue.push (p);
    }
  else
    transmit (p);
}

std::optional<TxEvent>
Scheduler::next_event ()
{
  while (m_ready.empty ())
    {
      if (m_queue.empty ())
        {
          while (!m_open.empty ())
            {
              m_ready.push_back (finalize (std::move (m_open.front ())));
              m_open.pop_front ();
            }
          break;
        }

      // No future packet can start at or before top, so occupancies that
      // ended earlier are complete.
      const SimTime top = m_queue.top ().sched_time;
      while (!m_open.empty () && m_open.front ().max_end < top)
        {
          m_ready.push_back (finalize (std::move (m_open.front ())));
          m_open.pop_front ();
        }
      if (!m_ready.empty ())
        break;

      Packet p = m_queue.pop ();
      if (p.sched_time < m_last_pop)
        throw InvariantError (fmt::format ("queue order: popped {} ps after {} ps", p.sched_time.count (),
                                           m_last_pop.count ()));
      m_last_pop = p.sched_time;

      if (p.sched_time >= m_plan.horizon)
        {
          expire (p);
          continue;
        }
      prune (p.sched_time);
      sense_and_act (p);
    }

  if (m_ready.empty ())
    return std::nullopt;
  TxEvent ev = std::move (m_ready.front ());
  m_ready.pop_front ();
  return ev;
}

RunResult
run (const PacketPlan &plan, const MacParams &params, const RadioConfig &radio, const PathLossModel &model,
     BackoffSource &backoff, SchedulerOptions options)
{
  Scheduler s (plan, params, radio, model, backoff, options);
  RunResult r;
  r.horizon = plan.horizon;
  while (auto ev = s.next_event ())
    r.events.push_back (std::move (*ev));
  r.counters = s.counters ();
  r.expired = s.expired ();
  r.transmissions = s.transmissions ();
  return r;
}

RunResult
run (const Scenario &scenario, const PathLossModel &model, const RadioConfig &radio, const MacParams &params,
     bool hv_transmits, SchedulerOptions options)
{
  const PacketPlan plan = build_plan (scenario, model, radio, params, hv_transmits);
  RngBackoff backoff (scenario.seed);
  return run (plan, params, radio, model, backoff, options);
}

void
check_invariants (const RunResult &result, const MacParams &params, const RadioConfig &radio,
                  const PathLossModel &model)
{
  const PacketCounters &c = result.counters;
  if (c.generated != c.decoded + c.collided + c.below_sensitivity + c.own + c.expired + c.queued)
    throw InvariantError (fmt::format ("conservation: generated {} != decoded {} + collided {} + below {} + own {} "
                                       "+ expired {} + queued {}",
                                       c.generated, c.decoded, c.collided, c.below_sensitivity, c.own, c.expired,
                                       c.queued));

  std::uint64_t members = 0;
  for (std::size_t i = 0; i < result.events.size (); ++i)
    {
      const TxEvent &ev = result.events[i];
      if (ev.members.empty ())
        throw InvariantError ("event without members");
      if (ev.end - ev.start != params.tx_interval)
        throw InvariantError (fmt::format ("event at {} ps has length {} ps", ev.start.count (),
                                           (ev.end - ev.start).count ()));
      if (i > 0 && !(result.events[i - 1].end < ev.start))
        throw InvariantError (fmt::format ("event at {} ps starts inside the previous one", ev.start.count ()));
      for (const Transmission &m : ev.members)
        {
          if (m.start < ev.start || m.start > ev.end || m.start < m.gen_time)
            throw InvariantError ("member " + describe (m) + " outside its event");
          if (m.start >= result.horizon)
            throw InvariantError ("member " + describe (m) + " started after the horizon");
        }
      if (ev.outcome == Outcome::Decoded)
        {
          const Transmission *w = ev.winner ();
          if (w == nullptr || w->from_hv || w->rss_at_hv_dbm < radio.rx_sensitivity_dbm)
            throw InvariantError (fmt::format ("event at {} ps decoded without a valid winner", ev.start.count ()));
        }
      members += ev.members.size ();
    }
  if (members + result.expired.size () + c.queued != c.generated)
    throw InvariantError (fmt::format ("conservation: {} event members + {} expired + {} queued != {} generated",
                                       members, result.expired.size (), c.queued, c.generated));
  if (members != c.transmissions)
    throw InvariantError ("transmission count does not match event members");

  // Pairwise audit over recorded transmissions: an audible pair either
  // starts within PD of each other or leaves the AIFS idle.
  const auto &tx = result.transmissions;
  const SimTime aifs = params.aifs ();
  std::size_t lo = 0;
  for (std::size_t j = 0; j < tx.size (); ++j)
    {
      const Transmission &b = tx[j];
      if (j > 0 && b.start < tx[j - 1].start)
        throw InvariantError ("transmissions out of start order");
      while (lo < j && tx[lo].end + aifs < b.start)
        ++lo;
      for (std::size_t i = lo; i < j; ++i)
        {
          const Transmission &a = tx[i];
          if (a.end + aifs < b.start)
            continue;
          const double d = distance (a.position, b.position);
          if (b.start - a.start <= params.propagation_delay (d) || b.start >= a.end + aifs)
            continue;
          if (is_hidden (radio, model, a.position, b.position))
            continue;
          throw InvariantError ("audible transmissions " + describe (a) + " and " + describe (b)
                                + " violate carrier sense or AIFS idleness");
        }
    }
}

} // namespace rtcsim
