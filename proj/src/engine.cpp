#include "janus/engine.hpp"

#include <algorithm>
#include <cstdio>
#include <iterator>
#include <limits>
#include <set>
#include <utility>

namespace janus {

const char* to_string(EventType t) {
  switch (t) {
    case EventType::Discovered: return "DISCOVERED";
    case EventType::Expired: return "EXPIRED";
    case EventType::IndexChange: return "INDEX_CHANGE";
    case EventType::ConflictReport: return "CONFLICT_REPORT";
    case EventType::Range: return "RANGE";
    case EventType::Alert: return "ALERT";
    case EventType::CrowdOn: return "CROWD_ON";
    case EventType::CrowdOff: return "CROWD_OFF";
    case EventType::Standby: return "STANDBY";
    case EventType::Resume: return "RESUME";
  }
  return "?";
}

const char* to_string(Role r) {
  switch (r) {
    case Role::Tag: return "tag";
    case Role::Inhibitor: return "inhibitor";
    case Role::Fixed: return "fixed";
  }
  return "?";
}

std::optional<Role> parse_role(std::string_view text) {
  if (text == "tag") return Role::Tag;
  if (text == "inhibitor") return Role::Inhibitor;
  if (text == "fixed") return Role::Fixed;
  return std::nullopt;
}

namespace {

action::Log log_event(EventType type, std::optional<NodeAddress> peer, std::string details) {
  return action::Log{type, peer, std::move(details)};
}

void append(Actions& out, Actions more) {
  out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
}

void update_crowd(NodeState& s, Actions& out) {
  const bool alarm = crowd_check(s, s.cfg.crowd_threshold);
  if (alarm == s.crowd_alarm) return;
  s.crowd_alarm = alarm;
  out.push_back(log_event(alarm ? EventType::CrowdOn : EventType::CrowdOff, std::nullopt,
                          "neighbors=" + std::to_string(s.neighbors.size())));
}

void refresh_conflict_report(NodeState& s, Actions& out) {
  const auto conflict = find_index_conflict(s.neighbors);
  if (conflict && conflict != s.pending_conflict_report) {
    out.push_back(log_event(EventType::ConflictReport, std::nullopt, "index=" + std::to_string(conflict->value())));
  }
  s.pending_conflict_report = conflict;
}

void change_index(NodeState& s, Actions& out, const char* reason) {
  const NodeIndex old = s.my_index;
  s.my_index = choose_new_index(s);
  out.push_back(log_event(EventType::IndexChange, std::nullopt,
                          "from=" + std::to_string(old.value()) + ";to=" + std::to_string(s.my_index.value()) +
                              ";reason=" + reason));
}

Actions start_epoch(NodeState& s, Instant now, bool boundary) {
  Actions out;
  if (boundary) {
    for (const auto& r : expire_neighbors(s.neighbors, now, s.cfg.expiry_epochs)) {
      s.tail_offsets.erase(r.address);
      out.push_back(log_event(EventType::Expired, r.address, "index=" + std::to_string(r.index.value())));
    }
    refresh_conflict_report(s, out);
    update_crowd(s, out);
  }
  s.epoch_start = now;
  s.adv_seq = 0;
  const int channel = kFirstAdvChannel + static_cast<int>(s.epoch_number % 3);
  ++s.epoch_number;
  out.push_back(action::StartScan{now + s.cfg.scan, channel});
  out.push_back(action::SetTimer{now + s.cfg.scan, TimerKind::ScanEnd, s.generation});
  out.push_back(action::SetTimer{now + s.cfg.scan, TimerKind::Advertise, s.generation});
  out.push_back(action::SetTimer{now + s.cfg.epoch, TimerKind::EpochStart, s.generation});
  return out;
}

std::vector<BusyInterval> known_neighbor_windows(const NodeState& s, Instant now) {
  std::vector<BusyInterval> busy;
  const Span margin = s.cfg.poll_guard;
  const Span period = s.cfg.ranging_period;
  const Span jitter = s.cfg.jitter;
  for (const auto& [addr, r] : s.neighbors) {
    if (!r.next_window_start) continue;
    const Instant start = *r.next_window_start;
    const Span dur = s.cfg.slot * r.cached_bitmap.count();
    if (start + dur > now) busy.push_back({start - std::min(margin, start.since_start()), start + dur + margin});
    // Successors: the owner places each window U +/- J after the previous end.
    Instant lo = start;
    Instant hi = start;
    for (int k = 1; k <= 2; ++k) {
      lo = lo + dur + period - jitter;
      hi = hi + dur + period + jitter;
      busy.push_back({lo - margin, hi + dur + margin});
    }
  }
  return busy;
}

}  // namespace

NodeState make_node(const NodeAddress& address, Role role, const ProtocolConfig& cfg, std::uint64_t seed) {
  NodeState s;
  s.address = address;
  s.role = role;
  s.cfg = cfg;
  s.rng.seed(seed);
  std::uniform_int_distribution<int> pick(0, kIndexSpace - 1);
  s.my_index = NodeIndex(pick(s.rng));
  return s;
}

Actions boot(NodeState& s, Instant now) {
  s.mode = Mode::Active;
  if (s.role == Role::Inhibitor) {
    return {action::SetTimer{now, TimerKind::Advertise, s.generation}};
  }
  return start_epoch(s, now, false);
}

AdvPayload make_payload(const NodeState& s, Instant adv_first_packet_time) {
  AdvPayload p;
  p.sender_index = s.my_index;
  if (s.next_window_start && *s.next_window_start > adv_first_packet_time) {
    const auto us = (*s.next_window_start - adv_first_packet_time).us();
    p.v_us = static_cast<std::uint32_t>(std::min<std::int64_t>(us, std::numeric_limits<std::uint32_t>::max()));
  }
  p.conflict_index = s.pending_conflict_report;
  p.flags.inhibitor = s.role == Role::Inhibitor;
  p.flags.crowd_alarm = s.crowd_alarm;
  p.bitmap = s.bitmap;
  return p;
}

NodeIndex choose_new_index(NodeState& s) {
  std::vector<SlotBitmap> cached;
  std::set<NodeIndex> in_use;
  for (const auto& [addr, r] : s.neighbors) {
    cached.push_back(r.cached_bitmap);
    in_use.insert(r.index);
  }
  in_use.insert(s.my_index);
  const auto free = free_indexes(s.bitmap, cached, in_use);
  if (free.empty()) throw IndexSpaceExhausted();
  std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
  return *std::next(free.begin(), static_cast<std::ptrdiff_t>(pick(s.rng)));
}

std::optional<NodeIndex> find_index_conflict(const NeighborTable& table) {
  std::set<NodeIndex> seen;
  std::optional<NodeIndex> lowest;
  for (const auto& [addr, r] : table) {
    if (!seen.insert(r.index).second && (!lowest || r.index < *lowest)) lowest = r.index;
  }
  return lowest;
}

bool crowd_check(const NodeState& s, int threshold) {
  return static_cast<long>(s.neighbors.size()) > threshold;
}

bool alert_check(NodeState& s, const RangeSample& sample, double alert_distance_m) {
  if (!sample.success || !(sample.distance_m < alert_distance_m)) return false;
  auto [it, inserted] = s.last_alert_epoch.try_emplace(sample.responder, s.epoch_number);
  if (!inserted) {
    if (it->second == s.epoch_number) return false;
    it->second = s.epoch_number;
  }
  return true;
}

Actions on_window_end(NodeState& s, Instant now) {
  std::set<NodeIndex> wanted;
  for (const auto& [addr, r] : s.neighbors) wanted.insert(r.index);
  std::vector<NodeIndex> added;
  std::vector<NodeIndex> departed;
  for (auto idx : wanted) {
    if (!s.bitmap.test(idx)) added.push_back(idx);
  }
  for (auto idx : s.bitmap.indexes()) {
    if (!wanted.contains(idx)) departed.push_back(idx);
  }
  s.bitmap = allocate_slots(s.bitmap, added, departed);
  s.next_window_duration = s.cfg.slot * s.bitmap.count();

  const auto busy = known_neighbor_windows(s, now);
  const Instant start = schedule_next_window(now, s.cfg.ranging_period, s.cfg.jitter, s.next_window_duration, busy,
                                             s.cfg.placement_tries, s.rng);
  s.next_window_start = start;
  Actions out;
  if (s.next_window_duration > Span{}) {
    out.push_back(action::SetTimer{start - s.cfg.uwb_wake_lead, TimerKind::WindowWake, s.generation});
  }
  out.push_back(action::SetTimer{start + s.next_window_duration, TimerKind::WindowEnd, s.generation});
  return out;
}

Actions on_inhibitor(NodeState& s, Instant now) {
  if (s.mode == Mode::Standby || s.role == Role::Inhibitor) return {};
  s.mode = Mode::Standby;
  ++s.generation;
  s.pending.clear();
  s.epoch_shift = Span{};
  s.next_window_start.reset();
  s.next_window_duration = Span{};
  return {action::RadiosOff{}, action::SetTimer{now + s.cfg.standby, TimerKind::StandbyEnd, s.generation},
          log_event(EventType::Standby, std::nullopt, "until_us=" + std::to_string((now + s.cfg.standby).us()))};
}

Actions on_timer(NodeState& s, Instant now, TimerKind kind, std::uint64_t token) {
  if (kind == TimerKind::InitiationWake) {
    const auto it = s.pending.find(token);
    if (it == s.pending.end() || s.mode != Mode::Active) return {};
    const PendingInitiation p = it->second;
    s.pending.erase(it);
    return {action::Initiate{p.owner, p.slot_start}};
  }
  if (token != s.generation) return {};

  switch (kind) {
    case TimerKind::EpochStart:
      if (s.mode != Mode::Active) return {};
      if (s.epoch_shift > Span{}) {
        const Span d = std::exchange(s.epoch_shift, Span{});
        return {action::SetTimer{now + d, TimerKind::EpochStart, s.generation}};
      }
      return start_epoch(s, now, true);

    case TimerKind::Advertise: {
      if (s.mode != Mode::Active) return {};
      Actions out{action::Advertise{make_payload(s, now)}};
      const Span slack = std::min(s.cfg.adv_delay_max, s.cfg.scan - s.cfg.adv_duration - s.cfg.adv_interval);
      std::uniform_int_distribution<Span::rep> delay(0, slack.ticks());
      if (s.role == Role::Inhibitor) {
        out.push_back(action::SetTimer{now + s.cfg.adv_interval + Span(delay(s.rng)), TimerKind::Advertise, s.generation});
        return out;
      }
      // First and last advertisements stay on the nominal grid so the train spans [L, E).
      const int n = advertisements_per_epoch(s.cfg);
      if (++s.adv_seq < n) {
        Instant next = s.epoch_start + s.cfg.scan + s.cfg.adv_interval * s.adv_seq;
        if (s.adv_seq < n - 1) next += Span(delay(s.rng));
        out.push_back(action::SetTimer{next, TimerKind::Advertise, s.generation});
      }
      return out;
    }

    case TimerKind::ScanEnd: {
      if (s.mode != Mode::ScanOnly) return {};
      // A full scan without hearing an inhibitor.
      s.mode = Mode::Active;
      Actions out{log_event(EventType::Resume, std::nullopt, "")};
      append(out, start_epoch(s, now, false));
      if (!s.neighbors.empty()) append(out, on_window_end(s, now));
      return out;
    }

    case TimerKind::WindowWake:
      if (s.mode != Mode::Active || !s.next_window_start) return {};
      return {action::OpenWindow{*s.next_window_start, *s.next_window_start + s.next_window_duration}};

    case TimerKind::WindowEnd:
      if (s.mode != Mode::Active) return {};
      return on_window_end(s, now);

    case TimerKind::StandbyEnd: {
      if (s.mode != Mode::Standby) return {};
      s.mode = Mode::ScanOnly;
      const int channel = kFirstAdvChannel + static_cast<int>(s.epoch_number % 3);
      ++s.epoch_number;
      return {action::StartScan{now + s.cfg.scan, channel},
              action::SetTimer{now + s.cfg.scan, TimerKind::ScanEnd, s.generation}};
    }

    case TimerKind::InitiationWake:
      break;
  }
  return {};
}

Actions on_advertisement(NodeState& s, const AdvPayload& payload, const NodeAddress& sender, Instant rx_time,
                         int rx_channel, double rssi, Instant now) {
  if (s.role == Role::Inhibitor || s.mode == Mode::Standby) return {};
  if (payload.flags.inhibitor) return on_inhibitor(s, now);
  if (s.mode == Mode::ScanOnly) return {};

  Actions out;
  const Instant reference = first_packet_time(rx_time, rx_channel, s.cfg.packet_gap);
  const bool is_new = !s.neighbors.contains(sender);
  update_neighbor(s.neighbors, payload, sender, rx_time, reference, rssi);
  if (is_new) {
    out.push_back(log_event(EventType::Discovered, sender, "index=" + std::to_string(payload.sender_index.value())));
  }

  // The same neighbor at the same offset in the tail of my scan twice: its epoch
  // starts less than b before mine, so it never hears me. Move my epoch once.
  const Span offset = reference - s.epoch_start;
  if (offset >= s.cfg.scan - s.cfg.adv_duration && offset < s.cfg.scan) {
    const auto [it, fresh] = s.tail_offsets.try_emplace(sender, offset);
    if (!fresh && it->second == offset && s.epoch_shift == Span{}) {
      std::uniform_int_distribution<Span::rep> shift(s.cfg.adv_duration.ticks(), s.cfg.scan.ticks());
      s.epoch_shift = Span(shift(s.rng));
      s.tail_offsets.clear();
    } else {
      it->second = offset;
    }
  }

  if (payload.sender_index == s.my_index && s.address < sender) {
    change_index(s, out, "neighbor");
  }
  if (payload.conflict_index && *payload.conflict_index == s.my_index) {
    change_index(s, out, "reported");
  }
  refresh_conflict_report(s, out);

  const NeighborRecord& rec = s.neighbors.at(sender);
  if (rec.next_window_start) {
    if (const auto ordinal = slot_ordinal(payload.bitmap, s.my_index)) {
      const Instant slot = responder_slot_start(*rec.next_window_start, *ordinal, s.cfg.slot);
      const bool duplicate = std::any_of(s.pending.begin(), s.pending.end(), [&](const auto& kv) {
        const Span d = kv.second.slot_start - slot;
        return kv.second.owner == sender && d < s.cfg.slot / 2 && -d < s.cfg.slot / 2;
      });
      if (!duplicate && slot - s.cfg.uwb_wake_lead > now) {
        const std::uint64_t token = s.next_token++;
        s.pending.emplace(token, PendingInitiation{sender, slot});
        out.push_back(action::SetTimer{slot - s.cfg.uwb_wake_lead, TimerKind::InitiationWake, token});
      }
    }
  }

  update_crowd(s, out);
  if (!s.next_window_start) append(out, on_window_end(s, now));
  return out;
}

Actions on_range_result(NodeState& s, const RangeSample& sample) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "distance_m=%.3f;success=%d", sample.distance_m, sample.success ? 1 : 0);
  Actions out{log_event(EventType::Range, sample.responder, buf)};
  if (alert_check(s, sample, s.cfg.alert_distance_m)) {
    std::snprintf(buf, sizeof buf, "distance_m=%.3f", sample.distance_m);
    out.push_back(log_event(EventType::Alert, sample.responder, buf));
  }
  return out;
}

}  // namespace janus
