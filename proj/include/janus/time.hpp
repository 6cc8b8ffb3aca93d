#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace janus {

/// Signed duration in simulation ticks. One tick is one nanosecond.
///
/// Arithmetic is overflow-checked: a result that does not fit in 64 bits
/// throws std::overflow_error rather than wrapping.
class Span {
 public:
  using rep = std::int64_t;

  constexpr Span() = default;
  constexpr explicit Span(rep ticks) : ticks_(ticks) {}

  [[nodiscard]] constexpr rep ticks() const { return ticks_; }
  [[nodiscard]] constexpr rep us() const { return ticks_ / 1000; }
  [[nodiscard]] constexpr double seconds() const { return static_cast<double>(ticks_) * 1e-9; }

  friend constexpr auto operator<=>(Span, Span) = default;

  friend Span operator+(Span a, Span b) { return Span(checked_add(a.ticks_, b.ticks_)); }
  friend Span operator-(Span a, Span b) { return Span(checked_sub(a.ticks_, b.ticks_)); }
  friend Span operator*(Span a, rep k) { return Span(checked_mul(a.ticks_, k)); }
  friend Span operator*(rep k, Span a) { return a * k; }
  friend rep operator/(Span a, Span b) { return a.ticks_ / b.ticks_; }
  friend Span operator/(Span a, rep k) { return Span(a.ticks_ / k); }
  friend Span operator%(Span a, Span b) { return Span(a.ticks_ % b.ticks_); }
  Span operator-() const { return Span(checked_sub(0, ticks_)); }
  Span& operator+=(Span o) { return *this = *this + o; }
  Span& operator-=(Span o) { return *this = *this - o; }

  static rep checked_add(rep a, rep b) {
    rep r{};
    if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("tick arithmetic overflow");
    return r;
  }
  static rep checked_sub(rep a, rep b) {
    rep r{};
    if (__builtin_sub_overflow(a, b, &r)) throw std::overflow_error("tick arithmetic overflow");
    return r;
  }
  static rep checked_mul(rep a, rep b) {
    rep r{};
    if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("tick arithmetic overflow");
    return r;
  }

 private:
  rep ticks_ = 0;
};

constexpr Span nanoseconds(std::int64_t n) { return Span(n); }
constexpr Span microseconds(std::int64_t n) { return Span(n * 1000); }
constexpr Span milliseconds(std::int64_t n) { return Span(n * 1000'000); }
constexpr Span seconds(std::int64_t n) { return Span(n * 1000'000'000); }
constexpr Span minutes(std::int64_t n) { return seconds(n * 60); }

/// Point in simulated time, measured from scenario start. Never negative.
class Instant {
 public:
  constexpr Instant() = default;
  constexpr explicit Instant(Span since_start) : since_start_(since_start) {
    if (since_start.ticks() < 0) throw std::out_of_range("negative instant");
  }

  [[nodiscard]] constexpr Span since_start() const { return since_start_; }
  [[nodiscard]] constexpr Span::rep ticks() const { return since_start_.ticks(); }
  [[nodiscard]] constexpr Span::rep us() const { return since_start_.us(); }

  static constexpr Instant at_us(std::int64_t us) { return Instant(microseconds(us)); }
  static constexpr Instant max() { return Instant(Span(std::numeric_limits<Span::rep>::max() / 4)); }

  friend constexpr auto operator<=>(Instant, Instant) = default;

  friend Instant operator+(Instant t, Span d) { return Instant(t.since_start_ + d); }
  friend Instant operator-(Instant t, Span d) { return Instant(t.since_start_ - d); }
  friend Span operator-(Instant a, Instant b) { return a.since_start_ - b.since_start_; }
  Instant& operator+=(Span d) { return *this = *this + d; }

 private:
  Span since_start_;
};

}  // namespace janus
