#include <doctest.h>

#include <algorithm>
#include <array>
#include <map>
#include <set>

#include "janus/engine.hpp"
#include "janus/simulator.hpp"

using namespace janus;

namespace {

const NodeAddress kLow = NodeAddress::from_u64(0x10);
const NodeAddress kHigh = NodeAddress::from_u64(0x20);

AdvPayload advert(int index, std::uint32_t v_us = 0, SlotBitmap bitmap = {}) {
  AdvPayload p;
  p.sender_index = NodeIndex(index);
  p.v_us = v_us;
  p.bitmap = bitmap;
  return p;
}

NodeSpec tag(std::uint64_t addr, double x, double y = 0.0) {
  NodeSpec n;
  n.address = NodeAddress::from_u64(addr);
  n.waypoints = {{Span{}, x, y}};
  return n;
}

std::vector<EventRecord> events_of(const SimOutput& out, const NodeAddress& node, EventType type) {
  std::vector<EventRecord> v;
  for (const auto& e : out.events) {
    if (e.node == node && e.type == type) v.push_back(e);
  }
  return v;
}

}  // namespace

TEST_CASE("payload countdown and conflict field") {
  NodeState s = make_node(kLow, Role::Tag, preset(LatencyClass::k2s), 1);
  const Instant t(seconds(10));
  s.next_window_start = t + milliseconds(500);
  CHECK(make_payload(s, t).v_us == 500'000);
  CHECK(make_payload(s, t).v_us - make_payload(s, t + milliseconds(160)).v_us == 160'000);
  CHECK(make_payload(s, t + seconds(1)).v_us == 0);
  CHECK_FALSE(make_payload(s, t).conflict_index.has_value());
  s.pending_conflict_report = NodeIndex(7);
  CHECK(make_payload(s, t).conflict_index == NodeIndex(7));
  CHECK(encode(make_payload(s, t))[7] == 7);
  CHECK(make_payload(s, t).sender_index == s.my_index);
}

TEST_CASE("index conflict between neighbors: lower address yields") {
  const auto cfg = preset(LatencyClass::k2s);
  NodeState low = make_node(kLow, Role::Tag, cfg, 1);
  low.my_index = NodeIndex(5);
  NodeState high = make_node(kHigh, Role::Tag, cfg, 2);
  high.my_index = NodeIndex(5);
  const Instant t(seconds(1));

  const SlotBitmap their_bitmap{11, 12};
  on_advertisement(low, advert(5, 0, their_bitmap), kHigh, t, 37);
  CHECK(low.my_index != NodeIndex(5));
  CHECK_FALSE(their_bitmap.test(low.my_index));

  on_advertisement(high, advert(5), kLow, t, 37);
  CHECK(high.my_index == NodeIndex(5));
}

TEST_CASE("common neighbor reports a shared index") {
  const auto cfg = preset(LatencyClass::k2s);
  NodeState m = make_node(NodeAddress::from_u64(0x30), Role::Tag, cfg, 3);
  m.my_index = NodeIndex(9);
  const Instant t(seconds(1));
  on_advertisement(m, advert(5), kLow, t, 37);
  CHECK_FALSE(m.pending_conflict_report.has_value());
  const auto actions = on_advertisement(m, advert(5), kHigh, t + milliseconds(1), 38);
  CHECK(m.pending_conflict_report == NodeIndex(5));
  CHECK(make_payload(m, t).conflict_index == NodeIndex(5));
  const bool logged = std::any_of(actions.begin(), actions.end(), [](const Action& a) {
    const auto* l = std::get_if<action::Log>(&a);
    return l && l->type == EventType::ConflictReport;
  });
  CHECK(logged);

  NodeState a = make_node(kLow, Role::Tag, cfg, 4);
  a.my_index = NodeIndex(5);
  on_advertisement(a, make_payload(m, t), m.address, t, 37);
  CHECK(a.my_index != NodeIndex(5));
}

TEST_CASE("shared index across a common neighbor resolves in simulation") {
  // A and C are out of each other's BLE range; B hears both.
  Scenario s;
  s.protocol = preset(LatencyClass::k2s);
  s.duration = seconds(30);
  s.seed = 5;
  s.nodes = {tag(0xA, 0.0), tag(0xB, 20.0), tag(0xC, 40.0)};
  s.nodes[0].initial_index = 5;
  s.nodes[1].initial_index = 9;
  s.nodes[2].initial_index = 5;
  const auto out = run(s);

  const auto reports = events_of(out, NodeAddress::from_u64(0xB), EventType::ConflictReport);
  REQUIRE_FALSE(reports.empty());
  CHECK(reports.front().details == "index=5");
  std::map<NodeAddress, int> final_index{{s.nodes[0].address, 5}, {s.nodes[2].address, 5}};
  std::map<NodeAddress, Instant> changed_at;
  for (const auto& e : out.events) {
    if (e.type != EventType::IndexChange || !final_index.contains(e.node)) continue;
    final_index[e.node] = std::stoi(e.details.substr(e.details.find("to=") + 3));
    changed_at.try_emplace(e.node, e.time);
  }
  CHECK(final_index.at(s.nodes[0].address) != 5);
  CHECK(final_index.at(s.nodes[2].address) != 5);
  for (const auto& [node, t] : changed_at) CHECK(t - reports.front().time <= s.protocol.epoch * 2);
}

TEST_CASE("bootstrap index is uniform") {
  std::array<int, kIndexSpace> counts{};
  const int draws = 10'000;
  for (int seed = 0; seed < draws; ++seed) {
    ++counts[static_cast<std::size_t>(make_node(kLow, Role::Tag, {}, static_cast<std::uint64_t>(seed)).my_index.value())];
  }
  const double expected = static_cast<double>(draws) / kIndexSpace;
  double chi2 = 0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 99th percentile of chi-square with 103 degrees of freedom.
  CHECK(chi2 < 140.2);
}

TEST_CASE("choose_new_index boundaries") {
  NodeState s = make_node(kLow, Role::Tag, {}, 1);
  s.my_index = NodeIndex(0);
  s.bitmap = SlotBitmap::full();
  s.bitmap.reset(NodeIndex(42));
  CHECK(choose_new_index(s) == NodeIndex(42));
  s.bitmap.set(NodeIndex(42));
  CHECK_THROWS_AS(choose_new_index(s), IndexSpaceExhausted);

  NodeState t = make_node(kLow, Role::Tag, {}, 2);
  for (int i = 0; i < 200; ++i) {
    const NodeIndex before = t.my_index;
    CHECK(choose_new_index(t) != before);
  }
}

TEST_CASE("slots change only at window end") {
  auto cfg = preset(LatencyClass::k2s);
  NodeState s = make_node(kLow, Role::Tag, cfg, 1);
  s.my_index = NodeIndex(50);
  const Instant t(seconds(4));
  on_advertisement(s, advert(2), kHigh, t, 37);  // bootstraps the first window
  REQUIRE(s.next_window_start.has_value());
  CHECK(s.bitmap == SlotBitmap{2});
  CHECK(s.next_window_duration == cfg.slot);

  on_advertisement(s, advert(9), NodeAddress::from_u64(0x40), t + milliseconds(100), 37);
  CHECK(s.bitmap == SlotBitmap{2});
  const Instant end = *s.next_window_start + s.next_window_duration;
  on_window_end(s, end);
  CHECK(s.bitmap == SlotBitmap{2, 9});
  CHECK(s.next_window_duration == cfg.slot * 2);

  const Instant end2 = *s.next_window_start + s.next_window_duration;
  const SlotBitmap before = s.bitmap;
  on_window_end(s, end2);
  CHECK(s.bitmap == before);
  CHECK(*s.next_window_start - end2 >= cfg.ranging_period - cfg.jitter);
  CHECK(*s.next_window_start - end2 <= cfg.ranging_period + cfg.jitter);

  s.neighbors.erase(NodeAddress::from_u64(0x40));
  on_window_end(s, *s.next_window_start + s.next_window_duration);
  CHECK(s.bitmap == SlotBitmap{2});
  CHECK(s.next_window_duration == cfg.slot);
}

TEST_CASE("neighbor advert schedules an initiation in my slot") {
  auto cfg = preset(LatencyClass::k2s);
  NodeState s = make_node(kLow, Role::Tag, cfg, 1);
  s.my_index = NodeIndex(6);
  const Instant t(seconds(4));
  const auto actions = on_advertisement(s, advert(3, 500'000, SlotBitmap{2, 6}), kHigh, t, 37);
  std::optional<action::SetTimer> wake;
  for (const auto& a : actions) {
    if (const auto* st = std::get_if<action::SetTimer>(&a); st && st->kind == TimerKind::InitiationWake) wake = *st;
  }
  REQUIRE(wake.has_value());
  const Instant slot = t + milliseconds(500) + cfg.slot;
  CHECK(wake->at == slot - cfg.uwb_wake_lead);
  const auto fired = on_timer(s, wake->at, TimerKind::InitiationWake, wake->token);
  REQUIRE(fired.size() == 1);
  const auto& init = std::get<action::Initiate>(fired[0]);
  CHECK(init.responder == kHigh);
  CHECK(init.slot_start == slot);
}

TEST_CASE("inhibitor present continuously") {
  Scenario s;
  s.protocol = preset(LatencyClass::k2s);
  s.duration = minutes(16);
  s.seed = 3;
  s.nodes = {tag(0x1, 0.0), tag(0x2, 1.5), tag(0x3, 3.0)};
  s.nodes[2].role = Role::Inhibitor;
  const auto out = run(s);
  CHECK(out.stats.scheduled == 0);
  CHECK(out.ranges.empty());
  for (int i = 0; i < 2; ++i) {
    const auto& a = s.nodes[static_cast<std::size_t>(i)].address;
    CHECK(events_of(out, a, EventType::Resume).empty());
    CHECK(events_of(out, a, EventType::Standby).size() >= 3);
  }
  for (const auto& e : out.energy) {
    CHECK(e.ledger[PowerState::UwbActive] == Span{});
    CHECK(e.ledger[PowerState::UwbWake] == Span{});
  }
}

TEST_CASE("inhibitor leaves during standby") {
  Scenario s;
  s.protocol = preset(LatencyClass::k2s);
  s.duration = minutes(7);
  s.seed = 4;
  s.nodes = {tag(0x1, 0.0), tag(0x2, 1.5), tag(0x3, 1.0, 1.0)};
  s.nodes[2].role = Role::Inhibitor;
  s.nodes[2].waypoints = {{seconds(5), 1.0, 1.0}, {seconds(6), 200.0, 1.0}};
  const auto out = run(s);
  for (int i = 0; i < 2; ++i) {
    const auto& a = s.nodes[static_cast<std::size_t>(i)].address;
    const auto standby = events_of(out, a, EventType::Standby);
    const auto resume = events_of(out, a, EventType::Resume);
    REQUIRE(standby.size() == 1);
    REQUIRE(resume.size() == 1);
    const Span off = resume[0].time - standby[0].time;
    CHECK(off >= s.protocol.standby);
    CHECK(off <= s.protocol.standby + s.protocol.scan);
  }
  // Ranging picks up again after the resume.
  CHECK(out.stats.succeeded > 0);
}

TEST_CASE("crowd alarm") {
  NodeState s = make_node(kLow, Role::Tag, {}, 1);
  for (int i = 0; i < 5; ++i) {
    update_neighbor(s.neighbors, advert(i), NodeAddress::from_u64(0x100 + static_cast<std::uint64_t>(i)), Instant(),
                    Instant());
  }
  CHECK(crowd_check(s, 4));
  s.neighbors.erase(s.neighbors.begin());
  CHECK_FALSE(crowd_check(s, 4));

  Scenario sc;
  sc.protocol = preset(LatencyClass::k2s);
  sc.protocol.crowd_threshold = 4;
  sc.duration = seconds(60);
  sc.seed = 8;
  sc.nodes.push_back(tag(0x1, 0.0));
  for (int i = 0; i < 5; ++i) {
    NodeSpec n = tag(0x10 + static_cast<std::uint64_t>(i), 1.0 + i * 0.5);
    n.waypoints.push_back({seconds(20), 1.0 + i * 0.5, 0.0});
    n.waypoints.push_back({seconds(21), 100.0 + i, 0.0});
    sc.nodes.push_back(n);
  }
  const auto out = run(sc);
  const auto on = events_of(out, sc.nodes[0].address, EventType::CrowdOn);
  const auto off = events_of(out, sc.nodes[0].address, EventType::CrowdOff);
  REQUIRE(on.size() == 1);
  REQUIRE(off.size() == 1);
  CHECK(on[0].time < Instant(seconds(20)));
  CHECK(off[0].time > Instant(seconds(21)));
  // Cleared at an epoch boundary, after the expiry delay.
  CHECK(off[0].time <= Instant(seconds(21) + sc.protocol.epoch * (sc.protocol.expiry_epochs + 1)));
}

TEST_CASE("alerts are strict and debounced per epoch") {
  NodeState s = make_node(kLow, Role::Tag, {}, 1);
  s.epoch_number = 3;
  auto sample = [](double d) { return RangeSample{kLow, kHigh, d, Instant(), true}; };
  CHECK_FALSE(alert_check(s, sample(2.0), 2.0));
  CHECK(alert_check(s, sample(1.5), 2.0));
  CHECK_FALSE(alert_check(s, sample(1.2), 2.0));
  s.epoch_number = 4;
  CHECK(alert_check(s, sample(1.2), 2.0));
  CHECK_FALSE(alert_check(s, RangeSample{kLow, kHigh, 0.5, Instant(), false}, 2.0));
}

TEST_CASE("advertising delay keeps the train inside the discovery bound") {
  const auto cfg = preset(LatencyClass::k2s);
  const Span slack = cfg.scan - cfg.adv_duration - cfg.adv_interval;
  NodeState s = make_node(kLow, Role::Tag, cfg, 12);
  const Instant t0(seconds(1));
  auto next_adv = [](const Actions& actions) -> std::optional<action::SetTimer> {
    for (const auto& a : actions) {
      if (const auto* st = std::get_if<action::SetTimer>(&a); st && st->kind == TimerKind::Advertise) return *st;
    }
    return std::nullopt;
  };
  auto timer = next_adv(boot(s, t0));
  std::vector<Instant> starts;
  while (timer) {
    starts.push_back(timer->at);
    timer = next_adv(on_timer(s, timer->at, TimerKind::Advertise, timer->token));
  }
  REQUIRE(static_cast<int>(starts.size()) == advertisements_per_epoch(cfg));
  CHECK(starts.front() == t0 + cfg.scan);
  CHECK(starts.back() + cfg.adv_duration == t0 + cfg.epoch);
  std::set<Span> gaps;
  for (std::size_t i = 1; i < starts.size(); ++i) {
    const Span gap = starts[i] - starts[i - 1];
    CHECK(gap <= cfg.scan - cfg.adv_duration);
    CHECK(gap >= cfg.adv_interval - slack);
    gaps.insert(gap);
  }
  CHECK(gaps.size() > 1);

  ProtocolConfig bad = cfg;
  bad.adv_delay_max = -milliseconds(1);
  CHECK(validate_config(bad)->field == "adv_delay_max_us");
}
