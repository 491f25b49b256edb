#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <queue>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rtcsim/channel.hpp"
#include "rtcsim/mac.hpp"
#include "rtcsim/scenario.hpp"

namespace rtcsim {

/// Static per-packet data, fixed at generation time.
struct PlannedPacket
{
  std::uint32_t seq = 0;
  SimTime gen_time;
  Point position;
  float speed_mps = 0.0F;
  float heading_rad = 0.0F;
  double hv_distance_m = 0.0;
  double rss_at_hv_dbm = 0.0;
};

/// packets[i].seq must equal i.
struct VehicleSchedule
{
  std::uint32_t vehicle_id = 0;
  bool is_hv = false;
  std::vector<PlannedPacket> packets; ///< ascending gen_time
};

/// Every packet of a run, precomputed before scheduling starts.
struct PacketPlan
{
  std::vector<VehicleSchedule> vehicles;
  SimTime horizon; ///< packets that cannot start before this expire

  std::size_t packet_count () const;
};

/// Generation schedule, kinematics and HV-side RSS for every vehicle. The
/// HV's own packets are included when `hv_transmits` is set; a scenario
/// without RVs yields an empty plan.
PacketPlan build_plan (const Scenario &scenario, const PathLossModel &model, const RadioConfig &radio,
                       const MacParams &params, bool hv_transmits);

/// A packet that went on air.
struct Transmission
{
  std::uint32_t vehicle_id = 0;
  std::uint32_t seq = 0;
  SimTime gen_time;
  SimTime start;
  SimTime end;
  Point position;
  float speed_mps = 0.0F;
  float heading_rad = 0.0F;
  double hv_distance_m = 0.0;
  double rss_at_hv_dbm = 0.0;
  bool from_hv = false;
};

enum class Outcome { Decoded, Collided, BelowSensitivity, Own };

std::string_view to_string (Outcome o);

/// One channel occupancy as seen from the HV. members[0] opened the
/// occupancy; the rest started before it ended (PD or hidden-node collisions).
struct TxEvent
{
  SimTime start;
  SimTime end;
  std::vector<Transmission> members;
  Outcome outcome = Outcome::Collided;
  std::optional<std::uint32_t> winner_id;
  double hv_distance_m = 0.0;

  std::uint32_t transmitter_id () const { return members.front ().vehicle_id; }
  std::size_t n_colliders () const { return members.size () - 1; }
  /// The decoded member, or nullptr.
  const Transmission *winner () const;
};

struct ExpiredPacket
{
  std::uint32_t vehicle_id = 0;
  std::uint32_t seq = 0;
  double hv_distance_m = 0.0;
  bool from_hv = false;
};

struct PacketCounters
{
  std::uint64_t generated = 0;
  std::uint64_t decoded = 0;
  std::uint64_t collided = 0;
  std::uint64_t below_sensitivity = 0;
  std::uint64_t own = 0;
  std::uint64_t expired = 0;
  std::uint64_t queued = 0;
  std::uint64_t transmissions = 0;
  std::uint64_t backoffs = 0;
  std::uint64_t aifs_deferrals = 0;

  bool operator== (const PacketCounters &) const = default;
};

/// Min-queue on (sched_time, vehicle_id, seq).
class PacketQueue
{
public:
  void push (const Packet &p) { m_heap.push (p); }
  Packet pop ();
  const Packet &top () const { return m_heap.top (); }
  bool empty () const { return m_heap.empty (); }
  std::size_t size () const { return m_heap.size (); }

private:
  struct Later
  {
    bool operator() (const Packet &a, const Packet &b) const;
  };
  std::priority_queue<Packet, std::vector<Packet>, Later> m_heap;
};

/// Queue holding the first packet of every vehicle in the plan.
/// Throws ValidationError for a plan without vehicles.
PacketQueue init_queue (const PacketPlan &plan, const MacParams &params);

struct SchedulerOptions
{
  bool record_transmissions = false;
};

/**
 * Event-driven CSMA/CA channel emulation.
 *
 * A popped packet is classified against every audible transmission that can
 * still affect it; hidden transmitters never block it. A fresh packet that
 * finds the medium busy (B) draws a counter and counts it down once the
 * medium has been idle for AIFS; one that lands in an AIFS tail (C) waits for
 * its end. A counting packet reaching zero transmits unless an audible frame
 * started during its countdown, in which case it keeps the slots it had left.
 * A transmitted packet joins the open occupancy when it starts before the
 * opener ends. Occupancies are resolved at the HV once no later packet can
 * overlap them.
 */
class Scheduler
{
public:
  Scheduler (const PacketPlan &plan, const MacParams &params, const RadioConfig &radio,
             const PathLossModel &model, BackoffSource &backoff, SchedulerOptions options = {});

  /// Advances until the next occupancy is resolved; nullopt when done.
  std::optional<TxEvent> next_event ();

  const PacketCounters &counters () const { return m_counters; }
  const std::vector<ExpiredPacket> &expired () const { return m_expired; }
  const std::vector<Transmission> &transmissions () const { return m_record; }

private:
  /// Medium blocked for the sensing packet over (lo, hi).
  struct Blocker
  {
    SimTime lo;
    SimTime hi;
    SimTime frame_end;
    OverlapState state;
  };

  struct OpenEvent
  {
    std::vector<Transmission> members;
    SimTime max_end;
  };

  Packet make_packet (std::size_t vehicle, std::size_t index, SimTime earliest) const;
  void insert_successor (const Packet &p);
  bool hidden (Point a, Point b) const;
  void prune (SimTime now);
  void sense_and_act (Packet &p);
  void transmit (const Packet &p);
  void expire (const Packet &p);
  TxEvent finalize (OpenEvent &&open);

  const PacketPlan &m_plan;
  MacParams m_params;
  RadioConfig m_radio;
  const PathLossModel &m_model;
  BackoffSource &m_backoff;
  SchedulerOptions m_options;

  PacketQueue m_queue;
  std::unordered_map<std::uint32_t, std::size_t> m_vehicle_index; ///< vehicle_id -> plan slot
  std::deque<Transmission> m_recent;
  std::deque<OpenEvent> m_open;
  std::deque<TxEvent> m_ready;
  std::vector<Blocker> m_blockers;
  SimTime m_last_pop;
  std::uint64_t m_processed = 0;
  PacketCounters m_counters;
  std::vector<ExpiredPacket> m_expired;
  std::vector<Transmission> m_record;
};

struct RunResult
{
  std::vector<TxEvent> events;
  PacketCounters counters;
  std::vector<ExpiredPacket> expired;
  std::vector<Transmission> transmissions; ///< only with record_transmissions
  SimTime horizon;
};

RunResult run (const PacketPlan &plan, const MacParams &params, const RadioConfig &radio,
               const PathLossModel &model, BackoffSource &backoff, SchedulerOptions options = {});

/// Convenience form: plan from the scenario, counters from the scenario seed.
RunResult run (const Scenario &scenario, const PathLossModel &model, const RadioConfig &radio,
               const MacParams &params, bool hv_transmits = true, SchedulerOptions options = {});

/// Post-run audit: ordering, fixed event length, conservation, and, when
/// transmissions were recorded, no sensed overlap and AIFS idleness between
/// mutually audible transmitters. Throws InvariantError on the first breach.
void check_invariants (const RunResult &result, const MacParams &params, const RadioConfig &radio,
                       const PathLossModel &model);

} // namespace rtcsim
