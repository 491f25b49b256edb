#pragma once

// Small hand-built plans for scheduler and oracle tests.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "rtcsim/channel.hpp"
#include "rtcsim/rng.hpp"
#include "rtcsim/scheduler.hpp"

namespace rtcsim::test {

struct Spec
{
  std::uint32_t vehicle_id;
  std::vector<std::int64_t> gen_us; ///< one packet per entry
  Point position;
  bool is_hv = false;
};

/// HV sits at the origin; RSS uses `model` without shadowing surprises as long
/// as the caller passes a sigma-free model.
inline PacketPlan
make_plan (const std::vector<Spec> &specs, SimTime horizon, const RadioConfig &radio, const PathLossModel &model)
{
  PacketPlan plan;
  plan.horizon = horizon;
  for (const Spec &s : specs)
    {
      VehicleSchedule vs;
      vs.vehicle_id = s.vehicle_id;
      vs.is_hv = s.is_hv;
      for (std::size_t i = 0; i < s.gen_us.size (); ++i)
        {
          PlannedPacket p;
          p.seq = static_cast<std::uint32_t> (i);
          p.gen_time = SimTime::us (s.gen_us[i]);
          p.position = s.position;
          p.hv_distance_m = s.is_hv ? 0.0 : distance (s.position, {});
          p.rss_at_hv_dbm = s.is_hv ? std::numeric_limits<double>::infinity ()
                                    : rss_dbm (radio, model, p.hv_distance_m);
          vs.packets.push_back (p);
        }
      plan.vehicles.push_back (std::move (vs));
    }
  return plan;
}

inline const TxEvent *
event_of (const RunResult &r, std::uint32_t vehicle_id, std::uint32_t seq = 0)
{
  for (const TxEvent &ev : r.events)
    for (const Transmission &m : ev.members)
      if (m.vehicle_id == vehicle_id && m.seq == seq)
        return &ev;
  return nullptr;
}

inline const Transmission *
tx_of (const RunResult &r, std::uint32_t vehicle_id, std::uint32_t seq = 0)
{
  for (const TxEvent &ev : r.events)
    for (const Transmission &m : ev.members)
      if (m.vehicle_id == vehicle_id && m.seq == seq)
        return &m;
  return nullptr;
}

struct Instance
{
  PacketPlan plan;
  TableBackoff table;
};

// 2-5 packets on a 1 us grid, spread along a road long enough for hidden pairs.
inline Instance
random_instance (std::uint64_t seed, const RadioConfig &radio, const PathLossModel &model)
{
  Rng rng (seed);
  const int packets = static_cast<int> (rng.uniform_int (2, 5));
  std::vector<Spec> specs;
  if (rng.uniform01 () < 0.3)
    specs.push_back ({0, {}, {0, 0}, true});
  int left = packets;
  std::uint32_t id = 1;
  while (left > 0)
    {
      Spec s{id++, {}, {rng.uniform (-1100.0, 1100.0), rng.uniform (-20.0, 20.0)}};
      const int mine = std::min<int> (left, rng.uniform01 () < 0.25 ? 2 : 1);
      auto t = static_cast<std::int64_t> (rng.uniform_int (0, 2500));
      for (int k = 0; k < mine; ++k)
        {
          s.gen_us.push_back (t);
          t += static_cast<std::int64_t> (rng.uniform_int (1, 2000));
        }
      left -= mine;
      specs.push_back (std::move (s));
    }
  // the HV slot, when present, takes one of the packets
  if (specs.front ().is_hv)
    {
      specs.front ().gen_us.push_back (static_cast<std::int64_t> (rng.uniform_int (0, 2500)));
      specs.back ().gen_us.pop_back ();
      if (specs.back ().gen_us.empty ())
        specs.pop_back ();
    }
  const SimTime horizon = rng.uniform01 () < 0.3 ? SimTime::us (static_cast<std::int64_t> (rng.uniform_int (1500, 4000))) : SimTime::us (100'000);

  Instance in;
  in.plan = make_plan (specs, horizon, radio, model);
  for (const VehicleSchedule &vs : in.plan.vehicles)
    for (const PlannedPacket &p : vs.packets)
      in.table.set (vs.vehicle_id, p.seq, static_cast<std::uint32_t> (rng.uniform_int (0, 15)));
  return in;
}

} // namespace rtcsim::test
