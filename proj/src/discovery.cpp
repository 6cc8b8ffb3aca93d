#include "janus/discovery.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace janus {

int advertisements_per_epoch(const ProtocolConfig& cfg) {
  const Span room = cfg.epoch - cfg.scan - cfg.adv_duration;
  if (room < Span{}) return 0;
  return static_cast<int>(room / cfg.adv_interval) + 1;
}

EpochSchedule build_epoch_schedule(const ProtocolConfig& cfg, Instant epoch_start, std::uint64_t epoch_number) {
  EpochSchedule s;
  s.epoch_start = epoch_start;
  s.scan = ScanSpec{epoch_start, cfg.scan, kFirstAdvChannel + static_cast<int>(epoch_number % 3)};
  const int n = advertisements_per_epoch(cfg);
  s.adv_starts.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) s.adv_starts.push_back(epoch_start + cfg.scan + cfg.adv_interval * i);
  return s;
}

Instant first_packet_time(Instant rx_packet_start, int rx_channel, Span packet_gap) {
  if (rx_channel < kFirstAdvChannel || rx_channel > kFirstAdvChannel + 2) {
    throw std::invalid_argument("advertising channel must be 37, 38 or 39");
  }
  return rx_packet_start - packet_gap * (rx_channel - kFirstAdvChannel);
}

void update_neighbor(NeighborTable& table, const AdvPayload& payload, const NodeAddress& sender, Instant rx_time,
                     Instant reference, double rssi) {
  auto [it, inserted] = table.try_emplace(sender);
  NeighborRecord& r = it->second;
  r.address = sender;
  r.index = payload.sender_index;
  r.last_heard = rx_time;
  r.epochs_missed = 0;
  r.heard_this_epoch = true;
  r.cached_bitmap = payload.bitmap;
  r.last_rssi = rssi;
  const Instant window = reference + microseconds(payload.v_us);
  if (payload.v_us > 0 && window >= rx_time) {
    r.next_window_start = window;
  } else {
    r.next_window_start.reset();
  }
}

std::vector<NeighborRecord> expire_neighbors(NeighborTable& table, Instant /*epoch_boundary*/, int expiry_epochs) {
  std::vector<NeighborRecord> removed;
  for (auto it = table.begin(); it != table.end();) {
    NeighborRecord& r = it->second;
    if (r.heard_this_epoch) {
      r.heard_this_epoch = false;
      r.epochs_missed = 0;
    } else {
      ++r.epochs_missed;
    }
    if (r.epochs_missed >= expiry_epochs) {
      removed.push_back(r);
      it = table.erase(it);
    } else {
      ++it;
    }
  }
  return removed;
}

namespace {

// Advertisement starts (ns, as doubles) of a node whose epochs begin at
// phase + k*E, restricted to [lo, hi].
template <typename F>
void for_each_adv_start(double phase, double lo, double hi, double E, double L, double A, int n, F&& f) {
  const auto k_lo = static_cast<long long>(std::floor((lo - phase - E) / E));
  const auto k_hi = static_cast<long long>(std::ceil((hi - phase) / E));
  for (long long k = k_lo; k <= k_hi; ++k) {
    const double base = phase + static_cast<double>(k) * E + L;
    const auto i_lo = std::max<long long>(0, static_cast<long long>(std::ceil((lo - base) / A)));
    const auto i_hi = std::min<long long>(n - 1, static_cast<long long>(std::floor((hi - base) / A)));
    for (long long i = i_lo; i <= i_hi; ++i) {
      const double a = base + A * static_cast<double>(i);
      if (a >= lo && a <= hi) f(a);
    }
  }
}

}  // namespace

double estimate_discovery_probability(const ProtocolConfig& cfg, int density, const OptimizerOptions& opts) {
  const double E = static_cast<double>(cfg.epoch.ticks());
  const double L = static_cast<double>(cfg.scan.ticks());
  const double A = static_cast<double>(cfg.adv_interval.ticks());
  const double tau = static_cast<double>(opts.packet_airtime.ticks());
  const double gap = static_cast<double>(opts.packet_gap.ticks());
  const int n = advertisements_per_epoch(cfg);

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> phase_dist(0.0, E);
  std::uniform_int_distribution<int> channel_dist(0, 2);
  std::vector<double> interferers(static_cast<std::size_t>(std::max(0, density - 1)));

  int successes = 0;
  for (int trial = 0; trial < opts.trials; ++trial) {
    // Scanner listens on [0, L); only channel offset matters.
    const double offset = gap * channel_dist(rng);
    const double target = phase_dist(rng);
    for (auto& p : interferers) p = phase_dist(rng);

    bool heard = false;
    for_each_adv_start(target, -offset, L - tau - offset, E, L, A, n, [&](double a) {
      if (heard) return;
      bool collided = false;
      for (double ph : interferers) {
        for_each_adv_start(ph, a - tau + 1e-9, a + tau - 1e-9, E, L, A, n, [&](double) { collided = true; });
        if (collided) break;
      }
      if (!collided) heard = true;
    });
    if (heard) ++successes;
  }
  return static_cast<double>(successes) / opts.trials;
}

OptimizerResult optimize(Span target_latency, int density, const OptimizerOptions& opts) {
  if (target_latency < seconds(1)) throw std::invalid_argument("target latency must be at least 1 s");
  if (density < 1) throw std::invalid_argument("density must be at least 1");

  const Span b = opts.adv_duration;
  const Span l_min = b + milliseconds(1);
  const Span l_max = target_latency / 4;

  // Geometric grid of scan lengths at 1 ms resolution.
  std::vector<Span> scans;
  for (double l = static_cast<double>(l_min.ticks()); l <= static_cast<double>(l_max.ticks()); l *= 1.03) {
    const Span s = milliseconds(static_cast<std::int64_t>(std::llround(l / 1e6)));
    if (s > b && (scans.empty() || s != scans.back())) scans.push_back(s);
  }

  std::optional<OptimizerResult> best;
  for (Span scan : scans) {
    for (int per_scan = 1; per_scan <= 8; ++per_scan) {
      ProtocolConfig cfg;
      cfg.epoch = target_latency;
      cfg.scan = scan;
      cfg.adv_duration = b;
      cfg.packet_gap = opts.packet_gap;
      cfg.adv_interval = microseconds((scan - b).us() / per_scan);
      if (cfg.adv_interval <= Span{} || validate_config(cfg)) break;

      const double duty = (static_cast<double>(scan.ticks()) +
                           advertisements_per_epoch(cfg) * static_cast<double>(b.ticks())) /
                          static_cast<double>(target_latency.ticks());
      if (best && duty >= best->duty_cycle) break;  // more adverts only cost more
      const double p = estimate_discovery_probability(cfg, density, opts);
      if (p >= opts.target_probability) {
        best = OptimizerResult{cfg.epoch, cfg.scan, cfg.adv_interval, p, duty};
        break;
      }
    }
  }
  if (!best) throw Infeasible("no (L, A) pair reaches the discovery bound");
  return *best;
}

}  // namespace janus
