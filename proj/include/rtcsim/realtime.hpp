#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "rtcsim/metrics.hpp"
#include "rtcsim/scheduler.hpp"

namespace rtcsim {

/// Receives decoded events on the pacing thread.
class EventSink
{
public:
  virtual ~EventSink () = default;
  virtual void deliver (const TxEvent &event) = 0;
};

class NullSink final : public EventSink
{
public:
  void deliver (const TxEvent &) override {}
};

/// Keeps every delivered event; safe to inspect after run_realtime returns.
class CollectingSink final : public EventSink
{
public:
  void deliver (const TxEvent &event) override;
  std::vector<TxEvent> events () const;

private:
  mutable std::mutex m_mutex;
  std::vector<TxEvent> m_events;
};

struct RealtimeOptions
{
  /// Simulated seconds per wall-clock second; 1 is real time.
  double speed = 1.0;
  /// Events the producer may run ahead of delivery.
  std::size_t buffer_capacity = 4096;
  /// Lag beyond which the run is aborted (one BSM period).
  std::chrono::nanoseconds lag_budget = std::chrono::milliseconds (100);

  void validate () const;
};

struct RealtimeRun
{
  RunResult result; ///< the full log, or the part produced before an abort
  RunStats stats;
  std::uint64_t delivered = 0;
  std::optional<std::string> violation;
};

/**
 * Paced execution of `run`.
 *
 * A producer thread runs the scheduler ahead of the clock into a bounded,
 * time-ordered buffer; the calling thread releases each Decoded event to
 * `sink` once the wall clock reaches its end time (epoch = call time).
 * Delivery lag is measured per event. A lag over the budget stops both
 * threads and sets `violation`; the log then holds the events handed over
 * so far.
 */
RealtimeRun run_realtime (const PacketPlan &plan, const MacParams &params, const RadioConfig &radio,
                          const PathLossModel &model, BackoffSource &backoff, EventSink &sink,
                          const RealtimeOptions &options = {});

RealtimeRun run_realtime (const Scenario &scenario, const PathLossModel &model, const RadioConfig &radio,
                          const MacParams &params, EventSink &sink, const RealtimeOptions &options = {},
                          bool hv_transmits = true);

/// Nearest-rank percentile of `values` (p in [0, 100]); empty input gives 0.
double percentile (std::vector<double> values, double p);

} // namespace rtcsim
