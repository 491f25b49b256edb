#include "rtcsim/mac.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rtcsim/errors.hpp"

namespace rtcsim {

namespace {

constexpr double kSpeedOfLight = 2.998e8;

} // namespace

std::string_view
to_string (PdMode mode)
{
  return mode == PdMode::Fixed ? "fixed" : "speed_of_light";
}

PdMode
parse_pd_mode (std::string_view name)
{
  if (name == "fixed")
    return PdMode::Fixed;
  if (name == "speed_of_light")
    return PdMode::PerPairSpeedOfLight;
  throw ValidationError ("unknown pd_mode '" + std::string (name) + "'");
}

SimTime
ofdm_frame_duration (std::uint32_t psdu_bytes, double rate_mbps)
{
  if (!(rate_mbps > 0.0))
    throw ValidationError ("ofdm_frame_duration: rate must be > 0");
  // 10 MHz channel: 8 us symbols, so a symbol carries 8 * rate bits
  const auto bits_per_symbol = static_cast<std::uint64_t> (std::llround (8.0 * rate_mbps));
  const std::uint64_t bits = 16 + 8 * static_cast<std::uint64_t> (psdu_bytes) + 6;
  const std::uint64_t symbols = (bits + bits_per_symbol - 1) / bits_per_symbol;
  return SimTime::us (40 + 8 * static_cast<std::int64_t> (symbols));
}

SimTime
MacParams::propagation_delay (double distance_m) const
{
  if (pd_mode == PdMode::Fixed)
    return pd;
  return SimTime::seconds (distance_m / kSpeedOfLight);
}

void
MacParams::validate () const
{
  if (slot_time <= SimTime{})
    throw ValidationError ("mac: slot_time must be > 0");
  if (sifs < SimTime{})
    throw ValidationError ("mac: sifs must be >= 0");
  if (tx_interval <= SimTime{})
    throw ValidationError ("mac: tx_interval must be > 0");
  if (cw_min > cw_max)
    throw ValidationError ("mac: cw_min must be <= cw_max");
  if (pd_mode == PdMode::Fixed && (pd < SimTime{} || pd >= tx_interval))
    throw ValidationError ("mac: pd must lie in [0, tx_interval)");
  if (!(tx_rate_hz > 0.0) || !std::isfinite (tx_rate_hz))
    throw ValidationError ("mac: tx_rate_hz must be > 0");
}

std::string_view
to_string (OverlapState s)
{
  switch (s)
    {
    case OverlapState::A1_CollisionPD:
      return "A1";
    case OverlapState::A2_CollisionHN:
      return "A2";
    case OverlapState::B_Backoff:
      return "B";
    case OverlapState::C_AifsWaiting:
      return "C";
    case OverlapState::D_PostTransmission:
      return "D";
    }
  return "D";
}

OverlapState
classify (SimTime diff, SimTime pd, SimTime tx_interval, SimTime aifs, bool hidden)
{
  if (diff < SimTime{})
    throw InvariantError ("classify: next scheduled before current (diff = "
                          + std::to_string (diff.count ()) + " ps)");
  if (hidden && diff <= tx_interval)
    return OverlapState::A2_CollisionHN;
  if (diff <= pd)
    return OverlapState::A1_CollisionPD;
  if (diff <= tx_interval)
    return OverlapState::B_Backoff;
  if (diff <= tx_interval + aifs)
    return OverlapState::C_AifsWaiting;
  return OverlapState::D_PostTransmission;
}

OverlapState
classify (const Packet &current, const Packet &next, const MacParams &params, bool hidden)
{
  const SimTime pd = params.propagation_delay (distance (current.tx_position, next.tx_position));
  return classify (next.sched_time - current.sched_time, pd, current.duration, params.aifs (), hidden);
}

std::uint32_t
RngBackoff::draw (const Packet &, const MacParams &params)
{
  return static_cast<std::uint32_t> (m_rng.uniform_int (params.cw_min, params.cw_max));
}

void
TableBackoff::set (std::uint32_t vehicle_id, std::uint32_t seq, std::uint32_t counter)
{
  m_table[{vehicle_id, seq}] = counter;
}

std::uint32_t
TableBackoff::draw (const Packet &packet, const MacParams &)
{
  auto it = m_table.find ({packet.vehicle_id, packet.seq});
  if (it == m_table.end ())
    throw InvariantError ("no backoff counter for vehicle " + std::to_string (packet.vehicle_id)
                          + " seq " + std::to_string (packet.seq));
  return it->second;
}

void
apply_backoff (Packet &next, BackoffSource &source, const MacParams &params, SimTime busy_end, SimTime blocked_at)
{
  if (!next.backoff_counter)
    next.backoff_counter = source.draw (next, params);
  else if (next.countdown_start && blocked_at > *next.countdown_start)
    {
      const std::int64_t done = (blocked_at - *next.countdown_start).count () / params.slot_time.count ();
      *next.backoff_counter -= static_cast<std::uint32_t> (std::min<std::int64_t> (done, *next.backoff_counter));
    }
  const SimTime resume = busy_end + params.aifs ();
  const SimTime when = resume + params.slot_time * *next.backoff_counter;
  if (when < next.sched_time)
    throw InvariantError ("apply_backoff: would move a packet earlier");
  next.countdown_start = resume;
  next.sched_time = when;
}

void
reschedule_after_aifs (Packet &next, SimTime current_end, const MacParams &params)
{
  const SimTime when = current_end + params.aifs ();
  if (when < next.sched_time)
    throw InvariantError ("reschedule_after_aifs: would move a packet earlier");
  next.sched_time = when;
}

} // namespace rtcsim
