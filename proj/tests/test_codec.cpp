#include <doctest.h>

#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "janus/codec.hpp"

using namespace janus;

namespace {

std::map<std::string, std::string> golden_vectors() {
  std::ifstream in(JANUS_TEST_VECTORS "/adv_payload.txt");
  REQUIRE(in.good());
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string name, hex;
    ss >> name >> hex;
    out[name] = hex;
  }
  return out;
}

AdvPayload random_payload(std::mt19937_64& rng) {
  AdvPayload p;
  p.sender_index = NodeIndex(static_cast<int>(rng() % 104));
  p.v_us = static_cast<std::uint32_t>(rng());
  if (rng() % 2) p.conflict_index = NodeIndex(static_cast<int>(rng() % 104));
  p.flags.inhibitor = rng() % 2;
  p.flags.crowd_alarm = rng() % 2;
  for (int i = 0; i < 104; ++i) {
    if (rng() % 3 == 0) p.bitmap.set(NodeIndex(i));
  }
  return p;
}

}  // namespace

TEST_CASE("golden payload vectors") {
  const auto v = golden_vectors();

  AdvPayload zero;
  zero.conflict_index = NodeIndex(0);
  const auto zero_bytes = encode(zero);
  CHECK(zero_bytes.size() == 22);
  CHECK(to_hex(zero_bytes) == v.at("zero"));

  AdvPayload p;
  p.sender_index = NodeIndex(2);
  p.bitmap = SlotBitmap{2, 6};
  const auto bytes = encode(p);
  CHECK(bytes[9] == 0x44);
  for (std::size_t i = 10; i < 22; ++i) CHECK(bytes[i] == 0);
  CHECK(to_hex(bytes) == v.at("index2_slots_2_6"));
  CHECK(decode(bytes).bitmap.count() == 2);

  AdvPayload s;
  s.sender_index = NodeIndex(103);
  s.v_us = 500'000;
  s.conflict_index = NodeIndex(7);
  s.flags = {true, true};
  s.bitmap = SlotBitmap::full();
  CHECK(to_hex(encode(s)) == v.at("saturated"));
  CHECK(decode(from_hex(v.at("saturated"))) == s);
}

TEST_CASE("round trip over random payloads") {
  std::mt19937_64 rng(1234);
  for (int i = 0; i < 1000; ++i) {
    const auto p = random_payload(rng);
    const auto bytes = encode(p);
    CHECK(bytes.size() <= 24);
    CHECK(decode(bytes) == p);
  }
}

TEST_CASE("decode rejects bad input") {
  AdvPayload p;
  auto bytes = encode(p);
  auto kind_of = [](std::span<const std::uint8_t> b) {
    try {
      decode(b);
    } catch (const DecodeError& e) {
      return e.kind();
    }
    FAIL("decode accepted invalid input");
    return DecodeErrorKind::BadLength;
  };
  CHECK(kind_of(std::span(bytes.data(), 21)) == DecodeErrorKind::BadLength);
  std::vector<std::uint8_t> longer(bytes.begin(), bytes.end());
  longer.push_back(0);
  CHECK(kind_of(longer) == DecodeErrorKind::BadLength);

  auto bad = bytes;
  bad[0] = 0x4B;
  CHECK(kind_of(bad) == DecodeErrorKind::BadMagic);
  bad = bytes;
  bad[2] = 0xD0;
  CHECK(kind_of(bad) == DecodeErrorKind::FieldOutOfRange);
  bad = bytes;
  bad[7] = 104;
  CHECK(kind_of(bad) == DecodeErrorKind::FieldOutOfRange);
  bad = bytes;
  bad[8] = 0x04;
  CHECK(kind_of(bad) == DecodeErrorKind::FieldOutOfRange);

  p.magic = 0x1234;
  CHECK_THROWS_AS(encode(p), InvalidPayload);
}

TEST_CASE("slot ordinal") {
  const SlotBitmap bm{2, 6};
  CHECK(slot_ordinal(bm, NodeIndex(2)) == 1);
  CHECK(slot_ordinal(bm, NodeIndex(6)) == 2);
  CHECK_FALSE(slot_ordinal(bm, NodeIndex(5)).has_value());
  CHECK(slot_ordinal(SlotBitmap::full(), NodeIndex(103)) == 104);

  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    SlotBitmap r;
    for (int i = 0; i < 104; ++i) {
      if (rng() % 4 == 0) r.set(NodeIndex(i));
    }
    int last = 0;
    for (auto idx : r.indexes()) {
      const int o = *slot_ordinal(r, idx);
      CHECK(o == last + 1);
      last = o;
    }
    CHECK(last == r.count());
  }
}

TEST_CASE("free indexes") {
  CHECK(free_indexes({}, {}, {}).size() == 104);

  const std::vector<SlotBitmap> cached{SlotBitmap{6, 7}};
  const auto f = free_indexes(SlotBitmap{2, 6}, cached, {NodeIndex(9)});
  CHECK(f.size() == 100);
  for (int x : {2, 6, 7, 9}) CHECK_FALSE(f.contains(NodeIndex(x)));

  CHECK(free_indexes(SlotBitmap::full(), {}, {}).empty());

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    SlotBitmap own;
    std::vector<SlotBitmap> others(3);
    for (int i = 0; i < 104; ++i) {
      if (rng() % 5 == 0) own.set(NodeIndex(i));
      for (auto& o : others) {
        if (rng() % 7 == 0) o.set(NodeIndex(i));
      }
    }
    for (auto x : free_indexes(own, others, {})) {
      CHECK_FALSE(own.test(x));
      for (const auto& o : others) CHECK_FALSE(o.test(x));
    }
  }
}

TEST_CASE("bitmap byte order") {
  const SlotBitmap bm{0, 8, 103};
  const auto b = bm.to_bytes();
  CHECK(b[0] == 0x01);
  CHECK(b[1] == 0x01);
  CHECK(b[12] == 0x80);
  CHECK(SlotBitmap::from_bytes(b) == bm);
  CHECK(from_hex("4a41") == std::vector<std::uint8_t>{0x4A, 0x41});
  CHECK_THROWS(from_hex("4A4"));
}
