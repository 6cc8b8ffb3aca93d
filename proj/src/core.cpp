#include "janus/core.hpp"

#include <charconv>
#include <cstdio>

namespace janus {

NodeAddress NodeAddress::from_u64(std::uint64_t value) {
  std::array<std::uint8_t, 6> b{};
  for (int i = 5; i >= 0; --i) {
    b[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(value & 0xFF);
    value >>= 8;
  }
  return NodeAddress(b);
}

NodeAddress NodeAddress::parse(std::string_view text) {
  std::array<std::uint8_t, 6> b{};
  if (text.size() != 17) throw std::invalid_argument("bad address: " + std::string(text));
  for (std::size_t i = 0; i < 6; ++i) {
    const auto part = text.substr(i * 3, 2);
    if (i < 5 && text[i * 3 + 2] != ':') throw std::invalid_argument("bad address: " + std::string(text));
    unsigned v = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + 2, v, 16);
    if (ec != std::errc{} || ptr != part.data() + 2) {
      throw std::invalid_argument("bad address: " + std::string(text));
    }
    b[i] = static_cast<std::uint8_t>(v);
  }
  return NodeAddress(b);
}

std::uint64_t NodeAddress::to_u64() const {
  std::uint64_t v = 0;
  for (auto byte : bytes_) v = (v << 8) | byte;
  return v;
}

std::string NodeAddress::to_string() const {
  char buf[18];
  std::snprintf(buf, sizeof buf, "%02X:%02X:%02X:%02X:%02X:%02X", bytes_[0], bytes_[1], bytes_[2],
                bytes_[3], bytes_[4], bytes_[5]);
  return buf;
}

namespace {

ConstraintViolation violation(std::string field, std::string reason) {
  return {std::move(field), std::move(reason)};
}

}  // namespace

std::optional<ConstraintViolation> validate_config(const ProtocolConfig& p) {
  const Span zero{};
  if (p.epoch <= zero) return violation("epoch_us", "E must be positive");
  if (p.adv_duration <= zero) return violation("adv_duration_us", "b must be positive");
  if (p.scan <= p.adv_duration) return violation("scan_us", "requires b < L");
  if (p.scan >= p.epoch) return violation("scan_us", "requires L < E");
  if (p.adv_interval <= zero) return violation("adv_interval_us", "A must be positive");
  if (p.adv_interval > p.scan - p.adv_duration) return violation("adv_interval_us", "requires A <= L - b");
  if (p.adv_delay_max < zero) return violation("adv_delay_max_us", "must be non-negative");
  if (p.packet_gap < zero || p.packet_gap * 2 >= p.adv_duration) {
    return violation("packet_gap_us", "requires 0 <= 2*delta < b");
  }
  if (p.ranging_period <= zero) return violation("ranging_period_us", "U must be positive");
  if (p.jitter < zero || p.jitter * 2 >= p.ranging_period) return violation("jitter_us", "requires 0 <= J < U/2");
  if (p.slot <= zero) return violation("slot_us", "R must be positive");
  if (p.expiry_epochs < 1) return violation("expiry_epochs", "K must be at least 1");
  if (p.standby < zero) return violation("standby_us", "must be non-negative");
  if (p.crowd_threshold < 0) return violation("crowd_threshold", "must be non-negative");
  if (!(p.alert_distance_m > 0.0)) return violation("alert_distance_m", "must be positive");
  if (p.uwb_wake_lead < zero) return violation("uwb_wake_lead_us", "must be non-negative");
  if (p.poll_guard < zero || p.reply_delay <= zero) {
    return violation("reply_delay_us", "guard must be non-negative and reply delay positive");
  }
  if (p.poll_guard + p.reply_delay >= p.slot) return violation("slot_us", "exchange does not fit in R");
  if (p.placement_tries < 1) return violation("placement_tries", "must be at least 1");
  return std::nullopt;
}

std::optional<ConstraintViolation> validate_phy(const PhyConfig& p) {
  if (!(p.ble_range_m > 0)) return violation("ble_range_m", "must be positive");
  if (!(p.uwb_range_m > 0)) return violation("uwb_range_m", "must be positive");
  if (!(p.uwb_sigma_m >= 0)) return violation("uwb_sigma_m", "must be non-negative");
  if (!(p.rssi.shadowing_db >= 0)) return violation("rssi_shadowing_db", "must be non-negative");
  if (p.propagation_speed != kSpeedOfLightAir) {
    return violation("propagation_speed", "fixed at 299702547 m/s");
  }
  if (!(p.clock_drift_ppm >= 0)) return violation("clock_drift_ppm", "must be non-negative");
  if (p.ble_airtime <= Span{}) return violation("ble_airtime_us", "must be positive");
  if (p.uwb_airtime <= Span{}) return violation("uwb_airtime_us", "must be positive");
  if (!(p.loss_probability >= 0 && p.loss_probability < 1)) {
    return violation("loss_probability", "must be in [0, 1)");
  }
  return std::nullopt;
}

void require_valid(const ProtocolConfig& p) {
  if (auto v = validate_config(p)) throw ConfigError(*v);
}

void require_valid(const PhyConfig& p) {
  if (auto v = validate_phy(p)) throw ConfigError(*v);
}

ProtocolConfig preset(LatencyClass latency) {
  ProtocolConfig p;
  switch (latency) {
    case LatencyClass::k2s:
      p.epoch = seconds(2);
      p.scan = milliseconds(70);
      p.adv_interval = milliseconds(55);
      break;
    case LatencyClass::k15s:
      p.epoch = seconds(15);
      p.scan = milliseconds(263);
      p.adv_interval = milliseconds(254);
      break;
    case LatencyClass::k30s:
      p.epoch = seconds(30);
      p.scan = milliseconds(364);
      p.adv_interval = milliseconds(357);
      break;
  }
  p.ranging_period = p.epoch;
  p.jitter = p.ranging_period / 20;
  return p;
}

std::optional<LatencyClass> parse_latency_class(std::string_view text) {
  if (text == "2s" || text == "2") return LatencyClass::k2s;
  if (text == "15s" || text == "15") return LatencyClass::k15s;
  if (text == "30s" || text == "30") return LatencyClass::k30s;
  return std::nullopt;
}

std::string to_string(LatencyClass latency) {
  switch (latency) {
    case LatencyClass::k2s: return "2s";
    case LatencyClass::k15s: return "15s";
    case LatencyClass::k30s: return "30s";
  }
  return "?";
}

}  // namespace janus
