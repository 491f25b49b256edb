#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string_view>
#include <utility>

#include "rtcsim/geometry.hpp"
#include "rtcsim/rng.hpp"
#include "rtcsim/time.hpp"

namespace rtcsim {

enum class PdMode { Fixed, PerPairSpeedOfLight };

std::string_view to_string (PdMode mode);
PdMode parse_pd_mode (std::string_view name);

/// On-air time of an OFDM frame on a 10 MHz 802.11p channel: 40 us of
/// preamble and SIGNAL, then 8 us symbols carrying SERVICE, PSDU and tail.
SimTime ofdm_frame_duration (std::uint32_t psdu_bytes, double rate_mbps = 6.0);

struct MacParams
{
  SimTime slot_time = SimTime::us (13);
  SimTime sifs = SimTime::us (32);
  std::uint32_t cw_min = 0;
  std::uint32_t cw_max = 15;
  /// 300 B BSM + 36 B MAC/LLC/FCS at 6 Mb/s.
  SimTime tx_interval = ofdm_frame_duration (336);
  PdMode pd_mode = PdMode::Fixed;
  SimTime pd = SimTime::us (3); ///< used when pd_mode is Fixed
  double tx_rate_hz = 10.0;

  SimTime aifs () const { return sifs + slot_time * 2; }
  /// Propagation delay between two transmitters `distance_m` apart.
  SimTime propagation_delay (double distance_m) const;

  void validate () const;
  bool operator== (const MacParams &) const = default;
};

/// One BSM channel-access attempt.
struct Packet
{
  std::uint32_t vehicle_id = 0;
  std::uint32_t seq = 0;
  SimTime gen_time;
  SimTime sched_time;
  SimTime duration;
  std::optional<std::uint32_t> backoff_counter; ///< slots still to count down
  std::optional<SimTime> countdown_start;       ///< idle instant the countdown resumed from
  Point tx_position; ///< at gen_time
  float speed_mps = 0.0F;
  float heading_rad = 0.0F;
  double hv_distance_m = 0.0;
  double rss_at_hv_dbm = 0.0; ///< +inf for the HV's own packets
  bool from_hv = false;
};

enum class OverlapState { A1_CollisionPD, A2_CollisionHN, B_Backoff, C_AifsWaiting, D_PostTransmission };

std::string_view to_string (OverlapState s);

/// Band classification of `diff` = next.sched - current.sched.
/// Throws InvariantError for a negative diff.
OverlapState classify (SimTime diff, SimTime pd, SimTime tx_interval, SimTime aifs, bool hidden);
OverlapState classify (const Packet &current, const Packet &next, const MacParams &params, bool hidden);

/// Supplier of backoff counters.
class BackoffSource
{
public:
  virtual ~BackoffSource () = default;
  virtual std::uint32_t draw (const Packet &packet, const MacParams &params) = 0;
};

/// Uniform draws over [cw_min, cw_max] from one run-level generator, in
/// draw order.
class RngBackoff final : public BackoffSource
{
public:
  explicit RngBackoff (std::uint64_t seed) : m_rng (mix64 (seed)) {}
  std::uint32_t draw (const Packet &packet, const MacParams &params) override;

private:
  Rng m_rng;
};

/// Counters fixed per (vehicle_id, seq) in advance, independent of the
/// order in which packets reach the backoff state.
class TableBackoff final : public BackoffSource
{
public:
  void set (std::uint32_t vehicle_id, std::uint32_t seq, std::uint32_t counter);
  std::uint32_t draw (const Packet &packet, const MacParams &params) override;

private:
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> m_table;
};

/// B state. Draws the counter if none is held. A packet interrupted during
/// its countdown first loses the idle slots it completed before the channel
/// turned busy at `blocked_at`. The countdown then resumes at busy_end + AIFS
/// and the packet is scheduled for when it would reach zero.
void apply_backoff (Packet &next, BackoffSource &source, const MacParams &params, SimTime busy_end,
                    SimTime blocked_at);

/// C state: move the packet to current_end + AIFS.
void reschedule_after_aifs (Packet &next, SimTime current_end, const MacParams &params);

} // namespace rtcsim
