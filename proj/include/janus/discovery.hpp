#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "janus/codec.hpp"
#include "janus/core.hpp"

namespace janus {

inline constexpr int kFirstAdvChannel = 37;

struct ScanSpec {
  Instant start;
  Span length;
  int channel = kFirstAdvChannel;
};

/// One discovery epoch: a scan at the epoch start followed by a train of
/// advertisements every A, the last one ending by the epoch end.
struct EpochSchedule {
  Instant epoch_start;
  ScanSpec scan;
  std::vector<Instant> adv_starts;
};

EpochSchedule build_epoch_schedule(const ProtocolConfig& cfg, Instant epoch_start, std::uint64_t epoch_number);

/// Number of advertisements per epoch: floor((E - L - b) / A) + 1.
int advertisements_per_epoch(const ProtocolConfig& cfg);

/// Start time of an advertisement's first packet (channel 37) given the
/// start of the packet received on `rx_channel`.
Instant first_packet_time(Instant rx_packet_start, int rx_channel, Span packet_gap);

struct NeighborRecord {
  NodeAddress address;
  NodeIndex index;
  Instant last_heard;
  int epochs_missed = 0;
  bool heard_this_epoch = false;
  SlotBitmap cached_bitmap;
  std::optional<Instant> next_window_start;
  double last_rssi = 0.0;
};

using NeighborTable = std::map<NodeAddress, NeighborRecord>;

/// Insert or refresh the record for `sender` from one received advertisement.
/// `reference` is the first-packet time of that advertisement. A zero v
/// means the owner's window is already under way and carries no schedule.
void update_neighbor(NeighborTable& table, const AdvPayload& payload, const NodeAddress& sender, Instant rx_time,
                     Instant reference, double rssi = 0.0);

/// Epoch-boundary bookkeeping. Records not heard during the elapsed epoch
/// accumulate a miss; records reaching `expiry_epochs` misses are removed
/// and returned.
std::vector<NeighborRecord> expire_neighbors(NeighborTable& table, Instant epoch_boundary, int expiry_epochs);

// --- parameter optimizer -------------------------------------------------

struct OptimizerResult {
  Span epoch;
  Span scan;
  Span adv_interval;
  double discovery_probability = 0.0;  // Monte Carlo estimate, one epoch
  double duty_cycle = 0.0;              // (L + n_adv * b) / E
};

struct OptimizerOptions {
  int trials = 10'000;
  std::uint64_t seed = 0x4A414E5553ULL;
  double target_probability = 0.95;
  Span adv_duration = milliseconds(5);
  Span packet_gap = microseconds(400);
  Span packet_airtime = microseconds(320);
};

class Infeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Monte Carlo estimate of the probability that a scanner hears one given
/// neighbor within one epoch when `density - 1` further neighbors advertise
/// with independent uniform phases. Any same-channel overlap destroys both packets.
double estimate_discovery_probability(const ProtocolConfig& cfg, int density, const OptimizerOptions& opts);

/// Minimum-duty-cycle (L, A) for epoch E = target_latency meeting the
/// discovery bound. Throws std::invalid_argument for target < 1 s or
/// density < 1, Infeasible when no candidate meets the bound.
OptimizerResult optimize(Span target_latency, int density, const OptimizerOptions& opts = {});

}  // namespace janus
