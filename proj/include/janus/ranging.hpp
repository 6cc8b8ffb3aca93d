#pragma once

#include <cmath>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "janus/codec.hpp"
#include "janus/core.hpp"

namespace janus {

/// A node-owned ranging window: one slot of size R per allocated neighbor,
/// in bitmap-ordinal order. The owner is the SS-TWR responder.
struct RangingWindow {
  NodeAddress owner;
  Instant start;
  Span slot;
  std::vector<NodeIndex> slots;

  [[nodiscard]] Span duration() const { return slot * static_cast<Span::rep>(slots.size()); }
  [[nodiscard]] Instant end() const { return start + duration(); }
};

RangingWindow make_window(const NodeAddress& owner, Instant start, Span slot, const SlotBitmap& bitmap);

/// SS-TWR timestamps. t1, t4 are in the initiator clock; t2, t3 in the
/// responder clock. T is an integer tick type (Span) or a sub-tick double.
template <typename T>
struct TwrTimestamps {
  T t1{};  // POLL transmit (initiator)
  T t2{};  // POLL receive (responder)
  T t3{};  // RESPONSE transmit (responder)
  T t4{};  // RESPONSE receive (initiator)
};

struct TwrResult {
  double distance_m = 0.0;
  bool clamped = false;  // time of flight came out negative
};

class MalformedTimestamps : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {
inline double tick_value(Span s) { return static_cast<double>(s.ticks()); }
inline double tick_value(double d) { return d; }
}  // namespace detail

/// ToF = ((t4 - t1) - (t3 - t2)) / 2; distance = ToF * c with ticks in ns.
template <typename T>
TwrResult sstwr_distance(const TwrTimestamps<T>& ts, double c = kSpeedOfLightAir) {
  if (!(ts.t4 > ts.t1) || ts.t3 < ts.t2) throw MalformedTimestamps("require t4 > t1 and t3 >= t2");
  const double round = detail::tick_value(ts.t4 - ts.t1);
  const double reply = detail::tick_value(ts.t3 - ts.t2);
  const double tof_ns = (round - reply) / 2.0;
  if (tof_ns < 0.0) return {0.0, true};
  return {tof_ns * 1e-9 * c, false};
}

/// Closed-form SS-TWR distance bias for a reply delay T_r (responder clock)
/// when the initiator clock runs `rel_drift` (fraction) fast relative to the responder.
inline double sstwr_drift_bias(Span reply_delay, double rel_drift, double c = kSpeedOfLightAir) {
  return c * reply_delay.seconds() * rel_drift / 2.0;
}

/// now + U + j, j uniform in [-J, +J] at tick resolution.
template <typename Rng>
Instant schedule_next_window(Instant now, Span period, Span jitter, Rng& rng) {
  if (jitter <= Span{}) return now + period;
  std::uniform_int_distribution<Span::rep> j(-jitter.ticks(), jitter.ticks());
  return now + period + Span(j(rng));
}

struct BusyInterval {
  Instant begin;
  Instant end;
};

/// Window start drawn like schedule_next_window, preferring a start whose
/// window [start, start + duration) avoids every busy interval. Up to
/// `tries` uniform candidates are drawn; the first conflict-free one wins,
/// otherwise the candidate with the least total overlap.
template <typename Rng>
Instant schedule_next_window(Instant now, Span period, Span jitter, Span duration, std::span<const BusyInterval> busy,
                             int tries, Rng& rng) {
  auto overlap = [&](Instant start) {
    const Instant end = start + duration;
    Span total{};
    for (const auto& b : busy) {
      const Instant lo = std::max(start, b.begin);
      const Instant hi = std::min(end, b.end);
      if (lo < hi) total += hi - lo;
      else if (duration == Span{} && b.begin <= start && start < b.end) total += nanoseconds(1);
    }
    return total;
  };
  Instant best = schedule_next_window(now, period, jitter, rng);
  Span best_overlap = overlap(best);
  for (int i = 1; i < tries && best_overlap > Span{}; ++i) {
    const Instant c = schedule_next_window(now, period, jitter, rng);
    const Span o = overlap(c);
    if (o < best_overlap) {
      best = c;
      best_overlap = o;
    }
  }
  return best;
}

/// (current \ departed) | newly_discovered.
SlotBitmap allocate_slots(const SlotBitmap& current, std::span<const NodeIndex> newly_discovered,
                          std::span<const NodeIndex> departed);

/// window_start + (ordinal - 1) * R.
Instant responder_slot_start(Instant window_start, int ordinal, Span slot);

struct RangeSample {
  NodeAddress initiator;
  NodeAddress responder;
  double distance_m = 0.0;
  Instant time;
  bool success = false;
};

}  // namespace janus
