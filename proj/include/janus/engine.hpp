#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "janus/codec.hpp"
#include "janus/core.hpp"
#include "janus/discovery.hpp"
#include "janus/ranging.hpp"

namespace janus {

enum class Mode { Active, Standby, ScanOnly };
enum class Role { Tag, Inhibitor, Fixed };

enum class EventType {
  Discovered,
  Expired,
  IndexChange,
  ConflictReport,
  Range,
  Alert,
  CrowdOn,
  CrowdOff,
  Standby,
  Resume,
};

const char* to_string(EventType t);
const char* to_string(Role r);
std::optional<Role> parse_role(std::string_view text);

enum class TimerKind : std::uint8_t {
  EpochStart,
  ScanEnd,
  Advertise,
  WindowWake,
  WindowEnd,
  InitiationWake,
  StandbyEnd,
};

namespace action {
struct SetTimer {
  Instant at;
  TimerKind kind;
  std::uint64_t token = 0;
};
struct StartScan {
  Instant until;
  int channel = kFirstAdvChannel;
};
/// Three packets on 37, 38, 39 starting now, spaced by the packet gap.
struct Advertise {
  AdvPayload payload;
};
/// Responder listening interval; the radio resumes `uwb_wake_lead` before `start`.
struct OpenWindow {
  Instant start;
  Instant end;
};
/// Wake now, POLL at slot_start + poll_guard.
struct Initiate {
  NodeAddress responder;
  Instant slot_start;
};
/// Abort any scan and UWB activity in progress.
struct RadiosOff {};
struct Log {
  EventType type;
  std::optional<NodeAddress> peer;
  std::string details;
};
}  // namespace action

using Action = std::variant<action::SetTimer, action::StartScan, action::Advertise, action::OpenWindow,
                            action::Initiate, action::RadiosOff, action::Log>;
using Actions = std::vector<Action>;

struct PendingInitiation {
  NodeAddress owner;
  Instant slot_start;
};

/// Complete per-node protocol state. A value type: copying a NodeState
/// forks the node, and every transition below is deterministic.
struct NodeState {
  NodeAddress address;
  Role role = Role::Tag;
  ProtocolConfig cfg;
  NodeIndex my_index;
  Mode mode = Mode::Active;
  NeighborTable neighbors;
  SlotBitmap bitmap;  // allocation advertised for the next window
  std::optional<Instant> next_window_start;
  Span next_window_duration{};
  std::optional<NodeIndex> pending_conflict_report;
  std::mt19937_64 rng;
  std::map<NodeAddress, std::uint64_t> last_alert_epoch;
  bool crowd_alarm = false;

  std::uint64_t epoch_number = 0;
  Instant epoch_start;
  int adv_seq = 0;  // advertisements sent this epoch
  std::map<NodeAddress, Span> tail_offsets;  // neighbors heard in the last b of my scan
  Span epoch_shift{};                         // delay applied to the next epoch start
  std::uint64_t generation = 1;
  std::map<std::uint64_t, PendingInitiation> pending;
  std::uint64_t next_token = 1;
};

/// Seeds the generator and draws the bootstrap index uniformly from [0, 103].
NodeState make_node(const NodeAddress& address, Role role, const ProtocolConfig& cfg, std::uint64_t seed);

class IndexSpaceExhausted : public std::runtime_error {
 public:
  IndexSpaceExhausted() : std::runtime_error("no free node index in this neighborhood") {}
};

Actions boot(NodeState& s, Instant now);
Actions on_timer(NodeState& s, Instant now, TimerKind kind, std::uint64_t token);

/// `rx_time` is the start of the received packet; `now` the processing time
/// (packet end). Malformed payloads never reach this point.
Actions on_advertisement(NodeState& s, const AdvPayload& payload, const NodeAddress& sender, Instant rx_time,
                         int rx_channel, double rssi, Instant now);
inline Actions on_advertisement(NodeState& s, const AdvPayload& payload, const NodeAddress& sender, Instant rx_time,
                                int rx_channel) {
  return on_advertisement(s, payload, sender, rx_time, rx_channel, 0.0, rx_time);
}

Actions on_range_result(NodeState& s, const RangeSample& sample);

AdvPayload make_payload(const NodeState& s, Instant adv_first_packet_time);

/// Uniform over the free indexes of the neighborhood, excluding the current one.
NodeIndex choose_new_index(NodeState& s);

/// Slot allocation for the window that just ended and placement of the next one.
Actions on_window_end(NodeState& s, Instant now);

Actions on_inhibitor(NodeState& s, Instant now);

bool crowd_check(const NodeState& s, int threshold);

/// True iff the sample is a success closer than the alert distance and no
/// alert for that neighbor was raised in the current epoch. Records the alert.
bool alert_check(NodeState& s, const RangeSample& sample, double alert_distance_m);

/// Index shared by two distinct neighbors, if any (lowest first).
std::optional<NodeIndex> find_index_conflict(const NeighborTable& table);

}  // namespace janus
