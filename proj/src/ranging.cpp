#include "janus/ranging.hpp"

namespace janus {

RangingWindow make_window(const NodeAddress& owner, Instant start, Span slot, const SlotBitmap& bitmap) {
  return RangingWindow{owner, start, slot, bitmap.indexes()};
}

SlotBitmap allocate_slots(const SlotBitmap& current, std::span<const NodeIndex> newly_discovered,
                          std::span<const NodeIndex> departed) {
  SlotBitmap out = current;
  for (auto i : departed) out.reset(i);
  for (auto i : newly_discovered) out.set(i);
  return out;
}

Instant responder_slot_start(Instant window_start, int ordinal, Span slot) {
  if (ordinal < 1) throw std::invalid_argument("slot ordinal starts at 1");
  return window_start + slot * (ordinal - 1);
}

}  // namespace janus
