#include <doctest.h>

#include <random>

#include "janus/core.hpp"

using namespace janus;

TEST_CASE("span arithmetic and overflow") {
  CHECK((milliseconds(3) + microseconds(500)).us() == 3500);
  CHECK((seconds(2) - seconds(3)).ticks() == -1'000'000'000);
  CHECK(seconds(2) / milliseconds(4) == 500);
  CHECK(milliseconds(5) * 3 == milliseconds(15));
  CHECK(minutes(5) == seconds(300));
  CHECK_THROWS_AS(Span(std::numeric_limits<Span::rep>::max()) + nanoseconds(1), std::overflow_error);
  CHECK_THROWS_AS(Span(std::numeric_limits<Span::rep>::max() / 2) * 3, std::overflow_error);
  CHECK_THROWS_AS(-Span(std::numeric_limits<Span::rep>::min()), std::overflow_error);
}

TEST_CASE("span addition is associative and commutative up to 1e15 ticks") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<Span::rep> d(-1'000'000'000'000'000, 1'000'000'000'000'000);
  for (int i = 0; i < 10'000; ++i) {
    const Span a(d(rng)), b(d(rng)), c(d(rng));
    CHECK((a + b) + c == a + (b + c));
    CHECK(a + b == b + a);
  }
}

TEST_CASE("instants are never negative") {
  CHECK_THROWS_AS(Instant(nanoseconds(-1)), std::out_of_range);
  CHECK_THROWS_AS(Instant() - nanoseconds(1), std::out_of_range);
  const Instant t = Instant::at_us(10);
  CHECK((t + microseconds(5)).us() == 15);
  CHECK((t - Instant()).us() == 10);
}

TEST_CASE("node address parsing and order") {
  const auto a = NodeAddress::parse("aa:bb:cc:dd:ee:01");
  CHECK(a.to_string() == "AA:BB:CC:DD:EE:01");
  CHECK(NodeAddress::from_u64(a.to_u64()) == a);
  CHECK_THROWS_AS(NodeAddress::parse("AA:BB:CC:DD:EE"), std::invalid_argument);
  CHECK_THROWS_AS(NodeAddress::parse("AA-BB-CC-DD-EE-FF"), std::invalid_argument);
  CHECK_THROWS_AS(NodeAddress::parse("AA:BB:CC:DD:EE:GG"), std::invalid_argument);

  std::mt19937_64 rng(9);
  for (int i = 0; i < 1000; ++i) {
    const auto x = NodeAddress::from_u64(rng() & 0xFFFFFFFFFFFFULL);
    const auto y = NodeAddress::from_u64(rng() & 0xFFFFFFFFFFFFULL);
    if (x == y) continue;
    CHECK(((x < y) != (y < x)));
    CHECK((x < y) == (x.to_u64() < y.to_u64()));
  }
}

TEST_CASE("node index range") {
  CHECK(NodeIndex(103).value() == 103);
  CHECK_THROWS_AS(NodeIndex(104), std::out_of_range);
  CHECK_THROWS_AS(NodeIndex(-1), std::out_of_range);
}

TEST_CASE("validate_config") {
  ProtocolConfig p;
  p.epoch = seconds(2);
  p.scan = milliseconds(170);
  p.adv_duration = milliseconds(5);
  p.adv_interval = milliseconds(160);
  p.slot = milliseconds(4);
  p.ranging_period = seconds(2);
  p.jitter = milliseconds(100);
  CHECK_FALSE(validate_config(p).has_value());

  SUBCASE("scan not shorter than epoch") {
    p.scan = p.epoch;
    const auto v = validate_config(p);
    REQUIRE(v.has_value());
    CHECK(v->field == "scan_us");
    CHECK_THROWS_AS(require_valid(p), ConfigError);
  }
  SUBCASE("advertising interval equal to scan") {
    p.adv_interval = p.scan;
    const auto v = validate_config(p);
    REQUIRE(v.has_value());
    CHECK(v->field == "adv_interval_us");
  }
  SUBCASE("jitter must stay below half the period") {
    p.jitter = seconds(1);
    REQUIRE(validate_config(p).has_value());
    CHECK(validate_config(p)->field == "jitter_us");
  }
  SUBCASE("slot too short for the exchange") {
    p.slot = microseconds(400);
    REQUIRE(validate_config(p).has_value());
    CHECK(validate_config(p)->field == "slot_us");
  }
}

TEST_CASE("validate_phy") {
  PhyConfig p;
  CHECK_FALSE(validate_phy(p).has_value());
  p.uwb_sigma_m = -0.1;
  REQUIRE(validate_phy(p).has_value());
  CHECK(validate_phy(p)->field == "uwb_sigma_m");
  p = {};
  p.propagation_speed = 3e8;
  REQUIRE(validate_phy(p).has_value());
  CHECK(validate_phy(p)->field == "propagation_speed");
}

TEST_CASE("presets") {
  const auto two = preset(LatencyClass::k2s);
  CHECK(two.epoch == seconds(2));
  CHECK(two.ranging_period == seconds(2));
  CHECK(preset(LatencyClass::k30s).epoch == seconds(30));
  CHECK(preset(LatencyClass::k15s).epoch == seconds(15));
  for (auto k : {LatencyClass::k2s, LatencyClass::k15s, LatencyClass::k30s}) {
    const auto p = preset(k);
    CHECK_FALSE(validate_config(p).has_value());
    CHECK(p.ranging_period == p.epoch);
    // the advertisement train ends exactly at the epoch end
    CHECK(((p.epoch - p.scan - p.adv_duration) % p.adv_interval) == Span{});
    CHECK(parse_latency_class(to_string(k)) == k);
  }
  CHECK_FALSE(parse_latency_class("7s").has_value());
}
