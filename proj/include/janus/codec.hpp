#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "janus/core.hpp"

namespace janus {

/// 104-bit ranging-slot allocation. Bit x set means a slot is allocated for
/// the neighbor holding index x; the slot number is the ordinal of that bit.
class SlotBitmap {
 public:
  static constexpr int kBits = kIndexSpace;
  static constexpr std::size_t kBytes = 13;

  SlotBitmap() = default;
  SlotBitmap(std::initializer_list<int> indexes);

  static SlotBitmap full();

  [[nodiscard]] bool test(NodeIndex i) const { return bits_.test(static_cast<std::size_t>(i.value())); }
  void set(NodeIndex i) { bits_.set(static_cast<std::size_t>(i.value())); }
  void reset(NodeIndex i) { bits_.reset(static_cast<std::size_t>(i.value())); }
  [[nodiscard]] int count() const { return static_cast<int>(bits_.count()); }
  [[nodiscard]] bool none() const { return bits_.none(); }
  /// Set indexes in ascending order (= slot order).
  [[nodiscard]] std::vector<NodeIndex> indexes() const;

  /// LSB-first within each byte: bit x lives in byte x/8 at position x%8.
  [[nodiscard]] std::array<std::uint8_t, kBytes> to_bytes() const;
  static SlotBitmap from_bytes(std::span<const std::uint8_t, kBytes> bytes);

  SlotBitmap& operator|=(const SlotBitmap& o) {
    bits_ |= o.bits_;
    return *this;
  }
  friend SlotBitmap operator|(SlotBitmap a, const SlotBitmap& b) { return a |= b; }
  friend bool operator==(const SlotBitmap&, const SlotBitmap&) = default;

 private:
  std::bitset<kBits> bits_;
};

struct AdvFlags {
  bool inhibitor = false;
  bool crowd_alarm = false;
  friend bool operator==(const AdvFlags&, const AdvFlags&) = default;
};

inline constexpr std::uint16_t kPayloadMagic = 0x4A41;
inline constexpr std::size_t kPayloadSize = 22;
inline constexpr std::uint8_t kNoConflict = 0xFF;

/// Application payload carried by every packet of one advertisement.
struct AdvPayload {
  std::uint16_t magic = kPayloadMagic;
  NodeIndex sender_index;
  std::uint32_t v_us = 0;  // first packet start -> next ranging window start
  std::optional<NodeIndex> conflict_index;
  AdvFlags flags;
  SlotBitmap bitmap;

  friend bool operator==(const AdvPayload&, const AdvPayload&) = default;
};

using PayloadBytes = std::array<std::uint8_t, kPayloadSize>;

enum class DecodeErrorKind { BadLength, BadMagic, FieldOutOfRange };

class DecodeError : public std::runtime_error {
 public:
  DecodeError(DecodeErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  [[nodiscard]] DecodeErrorKind kind() const { return kind_; }

 private:
  DecodeErrorKind kind_;
};

class InvalidPayload : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Layout (big-endian integers): magic[2] index[1] v_us[4] conflict[1] flags[1] bitmap[13].
PayloadBytes encode(const AdvPayload& p);
AdvPayload decode(std::span<const std::uint8_t> bytes);

/// 1 + number of set bits below `idx`, or nullopt when `idx` has no slot.
std::optional<int> slot_ordinal(const SlotBitmap& bm, NodeIndex idx);

/// Indexes that are zero in own | all cached bitmaps and not advertised by any neighbor.
std::set<NodeIndex> free_indexes(const SlotBitmap& own, std::span<const SlotBitmap> cached,
                                 const std::set<NodeIndex>& in_use_sender_indexes);

std::string to_hex(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> from_hex(std::string_view hex);

}  // namespace janus
