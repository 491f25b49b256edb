#include "rtcsim/realtime.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <exception>
#include <thread>

#include <fmt/format.h>

#include "rtcsim/errors.hpp"

namespace rtcsim {

void
CollectingSink::deliver (const TxEvent &event)
{
  std::lock_guard lock (m_mutex);
  m_events.push_back (event);
}

std::vector<TxEvent>
CollectingSink::events () const
{
  std::lock_guard lock (m_mutex);
  return m_events;
}

void
RealtimeOptions::validate () const
{
  if (!(speed > 0.0) || !std::isfinite (speed))
    throw ValidationError ("realtime: speed must be > 0");
  if (buffer_capacity == 0)
    throw ValidationError ("realtime: buffer_capacity must be > 0");
  if (lag_budget <= std::chrono::nanoseconds::zero ())
    throw ValidationError ("realtime: lag_budget must be > 0");
}

double
percentile (std::vector<double> values, double p)
{
  if (values.empty ())
    return 0.0;
  std::sort (values.begin (), values.end ());
  const double rank = std::ceil (p / 100.0 * static_cast<double> (values.size ()));
  const auto k = static_cast<std::size_t> (std::clamp (rank, 1.0, static_cast<double> (values.size ())));
  return values[k - 1];
}

namespace {

/// Bounded FIFO between producer and deliverer. `close` ends the stream,
/// `cancel` wakes a blocked producer and makes it give up.
class EventBuffer
{
public:
  explicit EventBuffer (std::size_t capacity) : m_capacity (capacity) {}

  bool
  push (TxEvent &&ev)
  {
    std::unique_lock lock (m_mutex);
    m_not_full.wait (lock, [&] { return m_cancelled || m_items.size () < m_capacity; });
    if (m_cancelled)
      return false;
    m_items.push_back (std::move (ev));
    m_not_empty.notify_one ();
    return true;
  }

  std::optional<TxEvent>
  pop ()
  {
    std::unique_lock lock (m_mutex);
    m_not_empty.wait (lock, [&] { return m_closed || !m_items.empty (); });
    if (m_items.empty ())
      return std::nullopt;
    TxEvent ev = std::move (m_items.front ());
    m_items.pop_front ();
    m_not_full.notify_one ();
    return ev;
  }

  void
  close ()
  {
    std::lock_guard lock (m_mutex);
    m_closed = true;
    m_not_empty.notify_all ();
  }

  void
  cancel ()
  {
    std::lock_guard lock (m_mutex);
    m_cancelled = true;
    m_not_full.notify_all ();
  }

private:
  std::size_t m_capacity;
  std::mutex m_mutex;
  std::condition_variable m_not_full;
  std::condition_variable m_not_empty;
  std::deque<TxEvent> m_items;
  bool m_closed = false;
  bool m_cancelled = false;
};

} // namespace

RealtimeRun
run_realtime (const PacketPlan &plan, const MacParams &params, const RadioConfig &radio, const PathLossModel &model,
              BackoffSource &backoff, EventSink &sink, const RealtimeOptions &options)
{
  options.validate ();
  using Clock = std::chrono::steady_clock;

  RealtimeRun out;
  out.result.horizon = plan.horizon;
  out.stats.sim_duration_s = plan.horizon.to_seconds ();
  const Clock::time_point epoch = Clock::now ();

  Scheduler scheduler (plan, params, radio, model, backoff, {});
  EventBuffer buffer (options.buffer_capacity);
  std::exception_ptr producer_error;

  std::thread producer ([&] {
    try
      {
        while (auto ev = scheduler.next_event ())
          if (!buffer.push (std::move (*ev)))
            break;
      }
    catch (...)
      {
        producer_error = std::current_exception ();
      }
    buffer.close ();
  });

  std::vector<double> lags;
  std::exception_ptr sink_error;
  while (auto ev = buffer.pop ())
    {
      if (ev->outcome == Outcome::Decoded)
        {
          const auto offset = std::chrono::duration<double> (ev->end.to_seconds () / options.speed);
          const Clock::time_point deadline = epoch + std::chrono::duration_cast<Clock::duration> (offset);
          std::this_thread::sleep_until (deadline);
          try
            {
              sink.deliver (*ev);
            }
          catch (...)
            {
              sink_error = std::current_exception ();
            }
          const auto lag = Clock::now () - deadline;
          lags.push_back (std::chrono::duration<double> (lag).count ());
          ++out.delivered;
          if (lag > options.lag_budget)
            out.violation = fmt::format ("event at {} s delivered {:.1f} ms late", ev->start.to_seconds (),
                                         std::chrono::duration<double, std::milli> (lag).count ());
        }
      out.result.events.push_back (std::move (*ev));
      if (out.violation || sink_error)
        {
          buffer.cancel ();
          break;
        }
    }
  producer.join ();
  if (producer_error)
    std::rethrow_exception (producer_error);
  if (sink_error)
    std::rethrow_exception (sink_error);

  out.result.counters = scheduler.counters ();
  out.result.expired = scheduler.expired ();
  out.stats.wall_time_s = std::chrono::duration<double> (Clock::now () - epoch).count ();
  out.stats.speedup = out.stats.wall_time_s > 0.0 ? out.stats.sim_duration_s / out.stats.wall_time_s : 0.0;
  out.stats.counters = out.result.counters;
  out.stats.realtime_violations = out.violation ? 1 : 0;
  if (!lags.empty ())
    out.stats.p99_delivery_lag_s = percentile (lags, 99.0);
  return out;
}

RealtimeRun
run_realtime (const Scenario &scenario, const PathLossModel &model, const RadioConfig &radio,
              const MacParams &params, EventSink &sink, const RealtimeOptions &options, bool hv_transmits)
{
  const PacketPlan plan = build_plan (scenario, model, radio, params, hv_transmits);
  RngBackoff backoff (scenario.seed);
  return run_realtime (plan, params, radio, model, backoff, sink, options);
}

} // namespace rtcsim
