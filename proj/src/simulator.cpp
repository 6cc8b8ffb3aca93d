#include "janus/simulator.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <tuple>

namespace janus {

void validate_scenario(const Scenario& s) {
  if (s.duration <= Span{}) throw ScenarioInvalid("duration must be positive");
  if (s.measure_from < Span{} || s.measure_from >= s.duration) {
    throw ScenarioInvalid("measure_from must lie inside the scenario");
  }
  if (auto v = validate_phy(s.phy)) throw ScenarioInvalid("phy." + v->field + ": " + v->reason);
  if (auto v = validate_config(s.protocol)) throw ScenarioInvalid("protocol." + v->field + ": " + v->reason);
  if (s.nodes.empty()) throw ScenarioInvalid("scenario has no nodes");
  std::set<NodeAddress> seen;
  for (const auto& n : s.nodes) {
    if (!seen.insert(n.address).second) throw ScenarioInvalid("duplicate address " + n.address.to_string());
    if (n.waypoints.empty()) throw ScenarioInvalid("node " + n.address.to_string() + " has no waypoints");
    for (std::size_t i = 1; i < n.waypoints.size(); ++i) {
      if (n.waypoints[i].time <= n.waypoints[i - 1].time) {
        throw ScenarioInvalid("waypoint times must increase for node " + n.address.to_string());
      }
    }
    if (n.waypoints.front().time < Span{}) throw ScenarioInvalid("negative waypoint time");
    if (n.start_offset && *n.start_offset < Span{}) throw ScenarioInvalid("negative start offset");
    if (n.initial_index && (*n.initial_index < 0 || *n.initial_index >= kIndexSpace)) {
      throw ScenarioInvalid("initial index of node " + n.address.to_string() + " must be in [0, 103]");
    }
    if (n.protocol) {
      if (auto v = validate_config(*n.protocol)) {
        throw ScenarioInvalid("node " + n.address.to_string() + " protocol." + v->field + ": " + v->reason);
      }
    }
  }
}

Position position_at(const NodeSpec& node, Instant t) {
  const auto& w = node.waypoints;
  if (w.empty()) return {};
  const Span at = t.since_start();
  if (at <= w.front().time) return {w.front().x, w.front().y};
  if (at >= w.back().time) return {w.back().x, w.back().y};
  const auto it = std::upper_bound(w.begin(), w.end(), at, [](Span v, const Waypoint& p) { return v < p.time; });
  const Waypoint& b = *it;
  const Waypoint& a = *(it - 1);
  const double f = static_cast<double>((at - a.time).ticks()) / static_cast<double>((b.time - a.time).ticks());
  return {a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)};
}

Instant in_range_since(const NodeSpec& a, const NodeSpec& b, Instant t, double range_m, Instant floor) {
  auto rel = [&](Instant at) {
    const Position pa = position_at(a, at);
    const Position pb = position_at(b, at);
    return Position{pa.x - pb.x, pa.y - pb.y};
  };
  auto in_range = [&](Instant at) {
    const Position d = rel(at);
    return std::hypot(d.x, d.y) <= range_m;
  };
  if (t <= floor || !in_range(t)) return std::max(t, floor);

  std::set<Span> breaks;
  for (const auto* n : {&a, &b}) {
    for (const auto& w : n->waypoints) {
      if (w.time > floor.since_start() && w.time < t.since_start()) breaks.insert(w.time);
    }
  }
  Instant seg_end = t;
  auto it = breaks.rbegin();
  while (true) {
    const Instant seg_start = it != breaks.rend() ? Instant(*it) : floor;
    if (in_range(seg_start)) {
      if (seg_start == floor) return floor;
      seg_end = seg_start;
      ++it;
      continue;
    }
    // Out of range at seg_start, in range at seg_end; relative motion is linear.
    const Position d0 = rel(seg_start);
    const Position d1 = rel(seg_end);
    const double dx = d1.x - d0.x;
    const double dy = d1.y - d0.y;
    const double qa = dx * dx + dy * dy;
    const double qb = 2 * (d0.x * dx + d0.y * dy);
    const double qc = d0.x * d0.x + d0.y * d0.y - range_m * range_m;
    double u = 1.0;
    if (qa > 0) {
      const double disc = std::max(0.0, qb * qb - 4 * qa * qc);
      u = std::clamp((-qb - std::sqrt(disc)) / (2 * qa), 0.0, 1.0);
    }
    const double ticks = std::ceil(u * static_cast<double>((seg_end - seg_start).ticks()));
    return seg_start + Span(static_cast<Span::rep>(ticks));
  }
}

std::vector<std::size_t> ble_deliver(const BlePacket& tx, std::span<const BlePacket> air,
                                     std::span<const BleReceiver> candidates, double ble_range_m) {
  std::vector<std::size_t> out;
  for (const auto& r : candidates) {
    if (r.node == tx.sender || !r.scan) continue;
    if (r.scan->channel != tx.channel || r.scan->from > tx.start || r.scan->until < tx.end) continue;
    if (distance(r.pos, tx.sender_pos) > ble_range_m) continue;
    bool collided = false;
    for (const auto& q : air) {
      if (&q == &tx || (q.sender == tx.sender && q.start == tx.start && q.channel == tx.channel)) continue;
      if (q.channel != tx.channel || !(q.start < tx.end && tx.start < q.end)) continue;
      if (q.sender == r.node || distance(r.pos, q.sender_pos) <= ble_range_m) {
        collided = true;
        break;
      }
    }
    if (!collided) out.push_back(r.node);
  }
  return out;
}

double rssi_at(double true_distance_m, const PhyConfig& phy, std::mt19937_64& rng) {
  if (!(true_distance_m > 0)) throw std::invalid_argument("distance must be positive");
  double rssi = phy.rssi.p0_dbm - 10.0 * phy.rssi.path_loss_exponent * std::log10(true_distance_m);
  if (phy.rssi.shadowing_db > 0) rssi += std::normal_distribution<double>(0.0, phy.rssi.shadowing_db)(rng);
  return rssi;
}

UwbExchange uwb_exchange(const UwbEndpoint& initiator, const UwbEndpoint& responder, Instant t, bool interfered,
                         const PhyConfig& phy, Span reply_delay, std::mt19937_64& rng) {
  UwbExchange x;
  x.true_distance_m = distance(initiator.pos, responder.pos);
  x.sample.initiator = initiator.address;
  x.sample.responder = responder.address;
  x.sample.time = t;
  if (interfered || x.true_distance_m > phy.uwb_range_m) return x;

  double measured = x.true_distance_m;
  if (phy.uwb_sigma_m > 0) measured += std::normal_distribution<double>(0.0, phy.uwb_sigma_m)(rng);
  const double tof = measured / phy.propagation_speed * 1e9;  // ns, may be negative under noise
  const double ei = 1.0 + initiator.clock_drift;
  const double er = 1.0 + responder.clock_drift;
  const double reply = static_cast<double>(reply_delay.ticks());
  // Device counters wrap; keeping timestamps small preserves sub-tick precision.
  const double t_poll = static_cast<double>(t.ticks() % seconds(1).ticks());

  x.timestamps.t1 = t_poll * ei;
  x.timestamps.t2 = (t_poll + tof) * er;
  x.timestamps.t3 = x.timestamps.t2 + reply;
  x.timestamps.t4 = x.timestamps.t1 + (2.0 * tof + reply / er) * ei;

  const TwrResult r = sstwr_distance(x.timestamps, phy.propagation_speed);
  x.sample.distance_m = r.distance_m;
  x.sample.success = true;
  return x;
}

namespace {

struct Interval {
  Instant from;
  Instant to;
};

struct SimNode {
  NodeSpec spec;
  NodeState state;
  Instant boot;
  double drift = 0.0;
  std::optional<ScanWindow> scan;
  std::vector<Interval> scans;
  std::vector<Interval> advs;
  std::vector<Interval> uwb_wake;
  std::vector<Interval> uwb_active;
  std::vector<Interval> listen;
  EnergyLedger counts;
};

struct AirPacket {
  std::uint64_t id = 0;
  BlePacket pkt;
  PayloadBytes bytes{};
};

struct UwbPacket {
  std::uint64_t id = 0;
  std::size_t sender = 0;
  Instant start;
  Instant end;
  Position sender_pos;
};

struct Exchange {
  std::size_t initiator = 0;
  std::size_t responder = 0;
  Instant slot;
  Instant t_poll;
  std::uint64_t poll_id = 0;
  std::uint64_t resp_id = 0;
  std::uint64_t initiator_generation = 0;
};

enum class Ev : std::uint8_t { PacketEnd, UwbPollEnd, UwbRespEnd, UwbPollTx, UwbRespTx, UwbFail, Timer, Boot };

struct QueueItem {
  Instant time;
  std::uint64_t addr = 0;
  Ev kind = Ev::Timer;
  std::uint64_t seq = 0;
  std::size_t node = 0;
  std::uint64_t a = 0;
  std::uint64_t b = 0;

  friend bool operator>(const QueueItem& x, const QueueItem& y) {
    return std::tie(x.time, x.addr, x.kind, x.seq) > std::tie(y.time, y.addr, y.kind, y.seq);
  }
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

bool overlaps(Instant a0, Instant a1, Instant b0, Instant b1) { return a0 < b1 && b0 < a1; }

Span clipped(const std::vector<Interval>& v, Instant from, Instant to) {
  Span total{};
  for (const auto& i : v) {
    const Instant lo = std::max(i.from, from);
    const Instant hi = std::min(i.to, to);
    if (lo < hi) total += hi - lo;
  }
  return total;
}

// Active wins over wake; whatever remains of [from, to) is deep sleep.
std::pair<Span, Span> uwb_split(const std::vector<Interval>& active, const std::vector<Interval>& wake, Instant from,
                                Instant to) {
  std::vector<std::tuple<Instant, int, int>> edges;  // time, +1/-1, 0=active 1=wake
  for (const auto& i : active) {
    edges.emplace_back(i.from, 1, 0);
    edges.emplace_back(i.to, -1, 0);
  }
  for (const auto& i : wake) {
    edges.emplace_back(i.from, 1, 1);
    edges.emplace_back(i.to, -1, 1);
  }
  std::sort(edges.begin(), edges.end());
  int n_active = 0;
  int n_wake = 0;
  Span a{};
  Span w{};
  Instant prev = from;
  for (const auto& [t, delta, kind] : edges) {
    const Instant lo = std::max(prev, from);
    const Instant hi = std::min(t, to);
    if (lo < hi) {
      if (n_active > 0) a += hi - lo;
      else if (n_wake > 0) w += hi - lo;
    }
    prev = std::max(prev, t);
    (kind == 0 ? n_active : n_wake) += delta;
  }
  return {a, w};
}

class Simulation {
 public:
  explicit Simulation(const Scenario& sc) : sc_(sc), medium_rng_(splitmix64(sc.seed ^ 0x6D656469756DULL)) {
    std::mt19937_64 setup(splitmix64(sc.seed));
    const double ppm = sc.phy.clock_drift_ppm * 1e-6;
    nodes_.reserve(sc.nodes.size());
    for (const auto& spec : sc.nodes) {
      SimNode n;
      n.spec = spec;
      const ProtocolConfig& cfg = spec.protocol ? *spec.protocol : sc.protocol;
      n.state = make_node(spec.address, spec.role, cfg, splitmix64(sc.seed ^ spec.address.to_u64()));
      if (spec.initial_index) n.state.my_index = NodeIndex(*spec.initial_index);
      const Span phase(std::uniform_int_distribution<Span::rep>(0, cfg.epoch.ticks() - 1)(setup));
      n.boot = Instant(spec.start_offset ? *spec.start_offset : phase);
      n.drift = ppm > 0 ? std::uniform_real_distribution<double>(-ppm, ppm)(setup) : 0.0;
      nodes_.push_back(std::move(n));
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) push(nodes_[i].boot, i, Ev::Boot);
  }

  SimOutput run() {
    const Instant end(sc_.duration);
    while (!queue_.empty() && queue_.top().time < end) {
      const QueueItem item = queue_.top();
      queue_.pop();
      dispatch(item);
    }
    finish(end);
    return std::move(out_);
  }

 private:
  void push(Instant t, std::size_t node, Ev kind, std::uint64_t a = 0, std::uint64_t b = 0) {
    queue_.push(QueueItem{t, nodes_[node].spec.address.to_u64(), kind, seq_++, node, a, b});
  }

  Position pos(std::size_t node, Instant t) const { return position_at(nodes_[node].spec, t); }
  bool measuring(Instant t) const { return t >= Instant(sc_.measure_from); }

  void dispatch(const QueueItem& item) {
    const Instant now = item.time;
    SimNode& n = nodes_[item.node];
    switch (item.kind) {
      case Ev::Boot:
        apply(item.node, now, boot(n.state, now));
        break;
      case Ev::Timer:
        apply(item.node, now, on_timer(n.state, now, static_cast<TimerKind>(item.a), item.b));
        break;
      case Ev::PacketEnd:
        deliver_ble(item.a, now);
        break;
      case Ev::UwbPollTx:
        poll_tx(item.a, now);
        break;
      case Ev::UwbPollEnd:
        poll_end(item.a, now);
        break;
      case Ev::UwbRespTx:
        resp_tx(item.a, now);
        break;
      case Ev::UwbRespEnd:
        resp_end(item.a, now);
        break;
      case Ev::UwbFail:
        finish_exchange(item.a, now, false);
        break;
    }
  }

  void apply(std::size_t i, Instant now, const Actions& actions) {
    for (const auto& a : actions) std::visit([&](const auto& act) { handle(i, now, act); }, a);
  }

  void handle(std::size_t i, Instant now, const action::SetTimer& t) {
    push(std::max(t.at, now), i, Ev::Timer, static_cast<std::uint64_t>(t.kind), t.token);
  }

  void handle(std::size_t i, Instant now, const action::StartScan& s) {
    SimNode& n = nodes_[i];
    n.scan = ScanWindow{s.channel, now, s.until};
    n.scans.push_back({now, s.until});
    if (measuring(now)) ++n.counts.scans;
  }

  void handle(std::size_t i, Instant now, const action::Advertise& a) {
    SimNode& n = nodes_[i];
    const PayloadBytes bytes = encode(a.payload);
    for (int k = 0; k < 3; ++k) {
      AirPacket p;
      p.id = next_id_++;
      p.pkt.sender = i;
      p.pkt.channel = kFirstAdvChannel + k;
      p.pkt.start = now + n.state.cfg.packet_gap * k;
      p.pkt.end = p.pkt.start + sc_.phy.ble_airtime;
      p.pkt.sender_pos = pos(i, p.pkt.start);
      p.bytes = bytes;
      push(p.pkt.end, i, Ev::PacketEnd, p.id);
      ble_air_.push_back(p);
      ++out_.stats.ble_packets;
    }
    n.advs.push_back({now, now + n.state.cfg.adv_duration});
    if (measuring(now)) ++n.counts.advertisements;
  }

  void handle(std::size_t i, Instant /*now*/, const action::OpenWindow& w) {
    SimNode& n = nodes_[i];
    n.listen.push_back({w.start, w.end});
    n.uwb_wake.push_back({w.start - n.state.cfg.uwb_wake_lead, w.start});
    n.uwb_active.push_back({w.start, w.end});
  }

  void handle(std::size_t i, Instant now, const action::Initiate& a) {
    SimNode& n = nodes_[i];
    const ProtocolConfig& cfg = n.state.cfg;
    const auto responder = index_of(a.responder);
    if (!responder) return;
    const Instant t_poll = a.slot_start + cfg.poll_guard;
    const Instant done = t_poll + cfg.reply_delay + sc_.phy.uwb_airtime * 2 + microseconds(10);
    n.uwb_wake.push_back({now, a.slot_start});
    n.uwb_active.push_back({a.slot_start, done});
    if (measuring(now)) ++n.counts.rangings;

    ++out_.stats.scheduled;
    auto& claims = slot_claims_[*responder];
    const Span slot = n.state.cfg.slot;
    // Same slot of the same owner, up to the microsecond rounding of v.
    for (const auto& [start, who] : claims) {
      if (who != i && a.slot_start - start < slot / 2 && start - a.slot_start < slot / 2) ++out_.stats.slot_collisions;
    }
    std::erase_if(claims, [&](const auto& c) { return c.first + slot * 4 < now; });
    claims.emplace_back(a.slot_start, i);

    const std::uint64_t xid = next_id_++;
    exchanges_[xid] = Exchange{i, *responder, a.slot_start, t_poll, 0, 0, n.state.generation};
    push(t_poll, i, Ev::UwbPollTx, xid);
  }

  void handle(std::size_t i, Instant now, const action::RadiosOff&) {
    SimNode& n = nodes_[i];
    if (n.scan && n.scan->until > now) {
      n.scan->until = now;
      n.scans.back().to = now;
    }
    for (auto* v : {&n.listen, &n.uwb_active, &n.uwb_wake}) {
      for (auto& iv : *v) iv.to = std::min(iv.to, now);
      std::erase_if(*v, [](const Interval& iv) { return iv.to <= iv.from; });
    }
  }

  void handle(std::size_t i, Instant now, const action::Log& l) {
    const SimNode& n = nodes_[i];
    out_.events.push_back(EventRecord{now, n.spec.address, l.type, l.peer, l.details});
    if (l.type == EventType::Discovered && l.peer) {
      if (const auto j = index_of(*l.peer)) {
        const Instant floor = std::max(n.boot, nodes_[*j].boot);
        const Instant since = in_range_since(n.spec, nodes_[*j].spec, now, sc_.phy.ble_range_m, floor);
        out_.latency.push_back(LatencyRecord{n.spec.address, *l.peer, since, now});
      }
    }
  }

  std::optional<std::size_t> index_of(const NodeAddress& a) const {
    if (address_index_.empty()) {
      for (std::size_t i = 0; i < nodes_.size(); ++i) address_index_[nodes_[i].spec.address] = i;
    }
    const auto it = address_index_.find(a);
    if (it == address_index_.end()) return std::nullopt;
    return it->second;
  }

  bool lost() {
    return sc_.phy.loss_probability > 0 &&
           std::uniform_real_distribution<double>(0.0, 1.0)(medium_rng_) < sc_.phy.loss_probability;
  }

  void deliver_ble(std::uint64_t id, Instant now) {
    const auto it = std::find_if(ble_air_.begin(), ble_air_.end(), [&](const AirPacket& p) { return p.id == id; });
    if (it == ble_air_.end()) return;
    const AirPacket packet = *it;

    std::vector<BlePacket> air;
    air.reserve(ble_air_.size());
    for (const auto& p : ble_air_) {
      if (p.id != id) air.push_back(p.pkt);
    }
    std::vector<BleReceiver> candidates;
    for (std::size_t r = 0; r < nodes_.size(); ++r) {
      const SimNode& n = nodes_[r];
      if (r == packet.pkt.sender || now < n.boot || n.state.role == Role::Inhibitor) continue;
      if (n.state.mode == Mode::Standby || !n.scan) continue;
      candidates.push_back(BleReceiver{r, pos(r, packet.pkt.start), n.scan});
    }
    const auto receivers = ble_deliver(packet.pkt, air, candidates, sc_.phy.ble_range_m);

    const AdvPayload payload = decode(packet.bytes);
    const NodeAddress sender = nodes_[packet.pkt.sender].spec.address;
    for (std::size_t r : receivers) {
      if (lost()) continue;
      const double d = std::max(1e-3, distance(pos(r, packet.pkt.start), packet.pkt.sender_pos));
      const double rssi = rssi_at(d, sc_.phy, medium_rng_);
      out_.rssi.push_back(RssiSample{nodes_[r].spec.address, sender, rssi, packet.pkt.start, packet.pkt.channel});
      ++out_.stats.ble_deliveries;
      apply(r, now,
            on_advertisement(nodes_[r].state, payload, sender, packet.pkt.start, packet.pkt.channel, rssi, now));
    }

    const Span keep = sc_.phy.ble_airtime * 2;
    std::erase_if(ble_air_, [&](const AirPacket& p) { return p.pkt.end + keep < now; });
  }

  bool uwb_clear(std::uint64_t packet_id, Instant start, Instant end, std::size_t receiver) const {
    const Position rp = pos(receiver, start);
    for (const auto& q : uwb_air_) {
      if (q.id == packet_id || !overlaps(q.start, q.end, start, end)) continue;
      if (q.sender == receiver || distance(q.sender_pos, rp) <= sc_.phy.uwb_range_m) return false;
    }
    return true;
  }

  bool listening(std::size_t node, Instant from, Instant to) const {
    const SimNode& n = nodes_[node];
    if (n.state.mode != Mode::Active) return false;
    return std::any_of(n.listen.begin(), n.listen.end(),
                       [&](const Interval& iv) { return iv.from <= from && to <= iv.to; });
  }

  std::uint64_t transmit_uwb(std::size_t sender, Instant start) {
    const std::uint64_t id = next_id_++;
    uwb_air_.push_back(UwbPacket{id, sender, start, start + sc_.phy.uwb_airtime, pos(sender, start)});
    return id;
  }

  void poll_tx(std::uint64_t xid, Instant now) {
    Exchange& x = exchanges_.at(xid);
    const SimNode& ini = nodes_[x.initiator];
    if (ini.state.mode != Mode::Active || ini.state.generation != x.initiator_generation) {
      exchanges_.erase(xid);
      return;
    }
    x.poll_id = transmit_uwb(x.initiator, now);
    push(now + sc_.phy.uwb_airtime, x.initiator, Ev::UwbPollEnd, xid);
  }

  void poll_end(std::uint64_t xid, Instant now) {
    Exchange& x = exchanges_.at(xid);
    const Instant start = x.t_poll;
    bool ok = distance(pos(x.initiator, start), pos(x.responder, start)) <= sc_.phy.uwb_range_m;
    if (ok && !listening(x.responder, start, now)) {
      ok = false;
      ++out_.stats.responder_absent;
    } else if (ok && !uwb_clear(x.poll_id, start, now, x.responder)) {
      ok = false;
      ++out_.stats.poll_interfered;
    }
    ok = ok && !lost();
    const ProtocolConfig& cfg = nodes_[x.initiator].state.cfg;
    if (ok) {
      push(start + cfg.reply_delay, x.responder, Ev::UwbRespTx, xid);
    } else {
      push(start + cfg.reply_delay + sc_.phy.uwb_airtime, x.initiator, Ev::UwbFail, xid);
    }
  }

  void resp_tx(std::uint64_t xid, Instant now) {
    Exchange& x = exchanges_.at(xid);
    if (nodes_[x.responder].state.mode != Mode::Active) {
      push(now + sc_.phy.uwb_airtime, x.initiator, Ev::UwbFail, xid);
      return;
    }
    x.resp_id = transmit_uwb(x.responder, now);
    push(now + sc_.phy.uwb_airtime, x.initiator, Ev::UwbRespEnd, xid);
  }

  void resp_end(std::uint64_t xid, Instant now) {
    const Exchange& x = exchanges_.at(xid);
    const Instant start = now - sc_.phy.uwb_airtime;
    const bool clear = uwb_clear(x.resp_id, start, now, x.initiator);
    if (!clear) ++out_.stats.response_interfered;
    const bool ok = clear && !lost();
    finish_exchange(xid, now, ok);
  }

  void finish_exchange(std::uint64_t xid, Instant now, bool ok) {
    const auto it = exchanges_.find(xid);
    if (it == exchanges_.end()) return;
    const Exchange x = it->second;
    exchanges_.erase(it);

    SimNode& ini = nodes_[x.initiator];
    const SimNode& res = nodes_[x.responder];
    const UwbEndpoint a{ini.spec.address, pos(x.initiator, x.t_poll), ini.drift};
    const UwbEndpoint b{res.spec.address, pos(x.responder, x.t_poll), res.drift};
    UwbExchange ex = uwb_exchange(a, b, x.t_poll, !ok, sc_.phy, ini.state.cfg.reply_delay, medium_rng_);
    ex.sample.time = now;
    if (ex.sample.success) ++out_.stats.succeeded;
    out_.ranges.push_back(ex.sample);
    if (ini.state.mode == Mode::Active && ini.state.generation == x.initiator_generation) {
      apply(x.initiator, now, on_range_result(ini.state, ex.sample));
    }

    const Span keep = milliseconds(5);
    std::erase_if(uwb_air_, [&](const UwbPacket& p) { return p.end + keep < now; });
  }

  void finish(Instant end) {
    const Instant measure_from(sc_.measure_from);
    for (auto& n : nodes_) {
      const Instant from = std::max(measure_from, std::min(n.boot, end));
      NodeEnergy e;
      e.node = n.spec.address;
      e.elapsed = end - from;
      e.ledger = n.counts;
      e.ledger[PowerState::Baseline] = e.elapsed;
      e.ledger[PowerState::BleScan] = clipped(n.scans, from, end);
      e.ledger[PowerState::BleAdvTx] = clipped(n.advs, from, end);
      const auto [active, wake] = uwb_split(n.uwb_active, n.uwb_wake, from, end);
      e.ledger[PowerState::UwbActive] = active;
      e.ledger[PowerState::UwbWake] = wake;
      e.ledger[PowerState::UwbDeepSleep] = e.elapsed - active - wake;
      out_.energy.push_back(e);
    }
  }

  const Scenario& sc_;
  std::vector<SimNode> nodes_;
  std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>> queue_;
  std::uint64_t seq_ = 0;
  std::uint64_t next_id_ = 1;
  std::vector<AirPacket> ble_air_;
  std::vector<UwbPacket> uwb_air_;
  std::map<std::uint64_t, Exchange> exchanges_;
  std::map<std::size_t, std::vector<std::pair<Instant, std::size_t>>> slot_claims_;
  mutable std::map<NodeAddress, std::size_t> address_index_;
  std::mt19937_64 medium_rng_;
  SimOutput out_;
};

}  // namespace

SimOutput run(const Scenario& scenario) {
  validate_scenario(scenario);
  return Simulation(scenario).run();
}

}  // namespace janus
