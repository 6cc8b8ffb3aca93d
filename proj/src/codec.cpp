#include "janus/codec.hpp"

#include <cctype>

namespace janus {

SlotBitmap::SlotBitmap(std::initializer_list<int> indexes) {
  for (int i : indexes) set(NodeIndex(i));
}

SlotBitmap SlotBitmap::full() {
  SlotBitmap bm;
  bm.bits_.set();
  return bm;
}

std::vector<NodeIndex> SlotBitmap::indexes() const {
  std::vector<NodeIndex> out;
  out.reserve(bits_.count());
  for (int i = 0; i < kBits; ++i) {
    if (bits_.test(static_cast<std::size_t>(i))) out.emplace_back(i);
  }
  return out;
}

std::array<std::uint8_t, SlotBitmap::kBytes> SlotBitmap::to_bytes() const {
  std::array<std::uint8_t, kBytes> out{};
  for (int i = 0; i < kBits; ++i) {
    if (bits_.test(static_cast<std::size_t>(i))) {
      out[static_cast<std::size_t>(i / 8)] |= static_cast<std::uint8_t>(1u << (i % 8));
    }
  }
  return out;
}

SlotBitmap SlotBitmap::from_bytes(std::span<const std::uint8_t, kBytes> bytes) {
  SlotBitmap bm;
  for (int i = 0; i < kBits; ++i) {
    if (bytes[static_cast<std::size_t>(i / 8)] & (1u << (i % 8))) bm.bits_.set(static_cast<std::size_t>(i));
  }
  return bm;
}

PayloadBytes encode(const AdvPayload& p) {
  if (p.magic != kPayloadMagic) throw InvalidPayload("payload magic must be 0x4A41");
  PayloadBytes out{};
  out[0] = static_cast<std::uint8_t>(p.magic >> 8);
  out[1] = static_cast<std::uint8_t>(p.magic & 0xFF);
  out[2] = static_cast<std::uint8_t>(p.sender_index.value());
  for (int i = 0; i < 4; ++i) out[static_cast<std::size_t>(3 + i)] = static_cast<std::uint8_t>(p.v_us >> (24 - 8 * i));
  out[7] = p.conflict_index ? static_cast<std::uint8_t>(p.conflict_index->value()) : kNoConflict;
  out[8] = static_cast<std::uint8_t>((p.flags.inhibitor ? 0x01 : 0) | (p.flags.crowd_alarm ? 0x02 : 0));
  const auto bm = p.bitmap.to_bytes();
  std::copy(bm.begin(), bm.end(), out.begin() + 9);
  return out;
}

AdvPayload decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kPayloadSize) {
    throw DecodeError(DecodeErrorKind::BadLength, "payload must be 22 bytes, got " + std::to_string(bytes.size()));
  }
  const auto magic = static_cast<std::uint16_t>((bytes[0] << 8) | bytes[1]);
  if (magic != kPayloadMagic) throw DecodeError(DecodeErrorKind::BadMagic, "bad payload magic");
  if (bytes[2] >= kIndexSpace) throw DecodeError(DecodeErrorKind::FieldOutOfRange, "sender index out of range");
  if (bytes[7] >= kIndexSpace && bytes[7] != kNoConflict) {
    throw DecodeError(DecodeErrorKind::FieldOutOfRange, "conflict index out of range");
  }
  if (bytes[8] & ~0x03u) throw DecodeError(DecodeErrorKind::FieldOutOfRange, "reserved flag bits set");

  AdvPayload p;
  p.magic = magic;
  p.sender_index = NodeIndex(bytes[2]);
  p.v_us = 0;
  for (int i = 0; i < 4; ++i) p.v_us = (p.v_us << 8) | bytes[static_cast<std::size_t>(3 + i)];
  if (bytes[7] != kNoConflict) p.conflict_index = NodeIndex(bytes[7]);
  p.flags.inhibitor = bytes[8] & 0x01;
  p.flags.crowd_alarm = bytes[8] & 0x02;
  p.bitmap = SlotBitmap::from_bytes(bytes.subspan<9, SlotBitmap::kBytes>());
  return p;
}

std::optional<int> slot_ordinal(const SlotBitmap& bm, NodeIndex idx) {
  if (!bm.test(idx)) return std::nullopt;
  int below = 0;
  for (int i = 0; i < idx.value(); ++i) {
    if (bm.test(NodeIndex(i))) ++below;
  }
  return below + 1;
}

std::set<NodeIndex> free_indexes(const SlotBitmap& own, std::span<const SlotBitmap> cached,
                                 const std::set<NodeIndex>& in_use_sender_indexes) {
  SlotBitmap used = own;
  for (const auto& bm : cached) used |= bm;
  std::set<NodeIndex> out;
  for (int i = 0; i < kIndexSpace; ++i) {
    const NodeIndex idx(i);
    if (!used.test(idx) && !in_use_sender_indexes.contains(idx)) out.insert(idx);
  }
  return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789ABCDEF";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    s.push_back(kDigits[b >> 4]);
    s.push_back(kDigits[b & 0xF]);
  }
  return s;
}

std::vector<std::uint8_t> from_hex(std::string_view hex) {
  std::vector<std::uint8_t> out;
  int nibble = -1;
  for (char c : hex) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    int v;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
    else throw std::invalid_argument("bad hex digit");
    if (nibble < 0) {
      nibble = v;
    } else {
      out.push_back(static_cast<std::uint8_t>((nibble << 4) | v));
      nibble = -1;
    }
  }
  if (nibble >= 0) throw std::invalid_argument("odd hex length");
  return out;
}

}  // namespace janus
