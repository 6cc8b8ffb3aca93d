#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "janus/core.hpp"
#include "janus/energy.hpp"
#include "janus/engine.hpp"
#include "janus/ranging.hpp"

namespace janus {

struct Position {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Position a, Position b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Waypoint {
  Span time;  // from scenario start
  double x = 0.0;
  double y = 0.0;
};

struct NodeSpec {
  NodeAddress address;
  Role role = Role::Tag;
  std::vector<Waypoint> waypoints;
  std::optional<Span> start_offset;          // boot time; random in [0, E) when absent
  std::optional<ProtocolConfig> protocol;    // per-node override
  std::optional<int> initial_index;          // bootstrap index; random when absent
};

struct Scenario {
  Span duration = seconds(60);
  std::uint64_t seed = 1;
  PhyConfig phy;
  ProtocolConfig protocol;
  std::vector<NodeSpec> nodes;
  Span measure_from{};  // energy ledgers cover [measure_from, duration)
};

class ScenarioInvalid : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void validate_scenario(const Scenario& s);

/// Piecewise-linear between waypoints, clamped outside them.
Position position_at(const NodeSpec& node, Instant t);

/// Start of the in-range interval containing `t` (never earlier than `floor`),
/// computed exactly from the piecewise-linear trajectories.
Instant in_range_since(const NodeSpec& a, const NodeSpec& b, Instant t, double range_m, Instant floor);

// --- radio models -----------------------------------------------------------

struct BlePacket {
  std::size_t sender = 0;
  int channel = kFirstAdvChannel;
  Instant start;
  Instant end;
  Position sender_pos;
};

struct ScanWindow {
  int channel = kFirstAdvChannel;
  Instant from;
  Instant until;
};

struct BleReceiver {
  std::size_t node = 0;
  Position pos;
  std::optional<ScanWindow> scan;
};

/// Receivers that get `tx`: in range, scanning its channel for its whole
/// airtime, and no other same-channel packet from a sender in range of the
/// receiver overlaps it. `air` may contain `tx` itself.
std::vector<std::size_t> ble_deliver(const BlePacket& tx, std::span<const BlePacket> air,
                                     std::span<const BleReceiver> candidates, double ble_range_m);

/// Log-distance path loss plus Gaussian shadowing.
double rssi_at(double true_distance_m, const PhyConfig& phy, std::mt19937_64& rng);

struct UwbEndpoint {
  NodeAddress address;
  Position pos;
  double clock_drift = 0.0;  // fractional rate offset, e.g. 20e-6
};

struct UwbExchange {
  RangeSample sample;
  TwrTimestamps<double> timestamps;  // sub-tick, each in its own clock
  double true_distance_m = 0.0;
};

/// One SS-TWR exchange starting with the POLL at `t`. Succeeds iff the pair
/// is within UWB range and `interfered` is false. The reported distance is
/// sstwr_distance over timestamps synthesized from the noisy time of flight
/// and both clocks' drift.
UwbExchange uwb_exchange(const UwbEndpoint& initiator, const UwbEndpoint& responder, Instant t, bool interfered,
                         const PhyConfig& phy, Span reply_delay, std::mt19937_64& rng);

// --- output -----------------------------------------------------------------

struct RssiSample {
  NodeAddress receiver;
  NodeAddress sender;
  double rssi_dbm = 0.0;
  Instant time;
  int channel = kFirstAdvChannel;
};

struct EventRecord {
  Instant time;
  NodeAddress node;
  EventType type;
  std::optional<NodeAddress> peer;
  std::string details;
};

struct LatencyRecord {
  NodeAddress node;
  NodeAddress neighbor;
  Instant in_range_since;
  Instant discovered;
  [[nodiscard]] Span latency() const { return discovered - in_range_since; }
};

struct NodeEnergy {
  NodeAddress node;
  EnergyLedger ledger;
  Span elapsed;
};

struct UwbStats {
  std::uint64_t scheduled = 0;        // initiations that reached the radio
  std::uint64_t succeeded = 0;
  std::uint64_t slot_collisions = 0;  // a second initiator in the same owner/slot
  std::uint64_t responder_absent = 0;  // POLL sent while the owner was not listening
  std::uint64_t poll_interfered = 0;
  std::uint64_t response_interfered = 0;
  std::uint64_t ble_packets = 0;
  std::uint64_t ble_deliveries = 0;
};

struct SimOutput {
  std::vector<RangeSample> ranges;
  std::vector<RssiSample> rssi;
  std::vector<EventRecord> events;
  std::vector<NodeEnergy> energy;
  std::vector<LatencyRecord> latency;
  UwbStats stats;
};

/// Runs the scenario to completion on a single time-ordered event queue.
/// Ties break by (time, node address, event rank, insertion order), so the
/// output depends only on the scenario and its seed.
SimOutput run(const Scenario& scenario);

}  // namespace janus
