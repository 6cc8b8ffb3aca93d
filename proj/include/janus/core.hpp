#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "janus/time.hpp"

namespace janus {

/// 6-byte BLE device address. Ordered byte-lexicographically; the order
/// decides which side of an index conflict gives way.
class NodeAddress {
 public:
  constexpr NodeAddress() = default;
  constexpr explicit NodeAddress(std::array<std::uint8_t, 6> bytes) : bytes_(bytes) {}

  /// Low 48 bits of `value`, most significant byte first.
  static NodeAddress from_u64(std::uint64_t value);
  /// Parses "AA:BB:CC:DD:EE:FF" (case-insensitive). Throws std::invalid_argument.
  static NodeAddress parse(std::string_view text);

  [[nodiscard]] const std::array<std::uint8_t, 6>& bytes() const { return bytes_; }
  [[nodiscard]] std::uint64_t to_u64() const;
  [[nodiscard]] std::string to_string() const;

  friend constexpr auto operator<=>(const NodeAddress&, const NodeAddress&) = default;

 private:
  std::array<std::uint8_t, 6> bytes_{};
};

inline constexpr int kIndexSpace = 104;

/// Locally-unique 1-byte node identifier; always < 104 (the bitmap width).
class NodeIndex {
 public:
  constexpr NodeIndex() = default;
  constexpr explicit NodeIndex(int value) : value_(static_cast<std::uint8_t>(value)) {
    if (value < 0 || value >= kIndexSpace) throw std::out_of_range("node index must be in [0, 103]");
  }
  [[nodiscard]] constexpr int value() const { return value_; }
  friend constexpr auto operator<=>(NodeIndex, NodeIndex) = default;

 private:
  std::uint8_t value_ = 0;
};

/// Protocol timing and policy parameters. Durations are Spans; the JSON form
/// stores them as integer microseconds.
struct ProtocolConfig {
  Span epoch = seconds(2);                   // E
  Span scan = milliseconds(70);              // L
  Span adv_duration = milliseconds(5);       // b
  Span adv_interval = milliseconds(55);      // A
  Span adv_delay_max = milliseconds(10);     // random advertising delay, capped at L - b - A
  Span packet_gap = microseconds(400);       // start-to-start of the 3 packets
  Span ranging_period = seconds(2);          // U
  Span jitter = milliseconds(100);           // J
  Span slot = milliseconds(4);               // R
  int expiry_epochs = 3;                     // K
  Span standby = minutes(5);
  int crowd_threshold = 10;
  double alert_distance_m = 2.0;
  Span uwb_wake_lead = microseconds(5500);   // deep-sleep resume delay
  Span poll_guard = microseconds(200);       // slot start to POLL
  Span reply_delay = microseconds(300);      // POLL RX to RESPONSE TX
  int placement_tries = 32;                  // window-placement candidates per period

  friend bool operator==(const ProtocolConfig&, const ProtocolConfig&) = default;
};

struct RssiModel {
  double p0_dbm = -59.0;        // at 1 m
  double path_loss_exponent = 2.0;
  double shadowing_db = 4.0;
  friend bool operator==(const RssiModel&, const RssiModel&) = default;
};

/// Speed of radio propagation in air, m/s.
inline constexpr double kSpeedOfLightAir = 299'702'547.0;

struct PhyConfig {
  double ble_range_m = 25.0;
  double uwb_range_m = 30.0;
  double uwb_sigma_m = 0.05;
  RssiModel rssi;
  double propagation_speed = kSpeedOfLightAir;
  double clock_drift_ppm = 0.0;
  Span ble_airtime = microseconds(320);
  Span uwb_airtime = microseconds(150);
  double loss_probability = 0.0;

  friend bool operator==(const PhyConfig&, const PhyConfig&) = default;
};

struct ConstraintViolation {
  std::string field;
  std::string reason;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(ConstraintViolation v)
      : std::runtime_error(v.field + ": " + v.reason), violation_(std::move(v)) {}
  [[nodiscard]] const ConstraintViolation& violation() const { return violation_; }

 private:
  ConstraintViolation violation_;
};

/// Empty when every invariant holds; otherwise the first violated constraint.
std::optional<ConstraintViolation> validate_config(const ProtocolConfig& p);
std::optional<ConstraintViolation> validate_phy(const PhyConfig& p);

/// Throws ConfigError on the first violation.
void require_valid(const ProtocolConfig& p);
void require_valid(const PhyConfig& p);

enum class LatencyClass { k2s, k15s, k30s };

/// Calibrated configuration for one of the three detection-latency classes.
/// E = U = latency; L and A chosen so the last advertisement ends at E.
ProtocolConfig preset(LatencyClass latency);
/// Accepts "2s", "15s", "30s" (or plain seconds "2", "15", "30").
std::optional<LatencyClass> parse_latency_class(std::string_view text);
std::string to_string(LatencyClass latency);

}  // namespace janus
