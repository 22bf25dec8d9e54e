#pragma once

#include <cassert>
#include <cstdint>
#include <cstring>
#include <utility>

#include "gbt/bitmask.hpp"
#include "gbt/common.hpp"
#include "gbt/succ.hpp"

namespace gbt {

// In-node update mechanics over a gapped key region. All routines work in
// the lane domain (exact keys or FOR differences) and locate slots through
// the occupancy mask only, never by scanning key values.

// Maximal contiguous slot range [first, last] sharing the key value at
// `slot`, where `slot` is a succ_ge hit for a key present in the node.
// The run is the used slot holding the value plus the gap slots directly
// below it that duplicate it.
template <class Lane>
inline std::pair<unsigned, unsigned> gap_run_bounds(
    typename lane_traits<Lane>::mask_type bitmap, unsigned slot) {
  const unsigned last = next_used(bitmap, slot);
  assert(last < lane_traits<Lane>::capacity);
  const unsigned first = static_cast<unsigned>(prev_used(bitmap, slot) + 1);
  return {first, last};
}

// Restore the gap rule over a freshly written region: every unused slot
// takes the value of the first subsequent used slot, trailing unused slots
// take the sentinel.
template <class Lane>
inline void fill_gap_values(Lane* keys, typename lane_traits<Lane>::mask_type bitmap) {
  Lane carry = lane_traits<Lane>::sentinel;
  for (int i = static_cast<int>(lane_traits<Lane>::capacity) - 1; i >= 0; --i) {
    if (slot_used(bitmap, static_cast<unsigned>(i)))
      carry = keys[i];
    else
      keys[i] = carry;
  }
}

// Insert lane value `k` at the position r = succ_ge(keys, k). The caller
// has already rejected duplicates and full nodes. `place_cap` bounds the
// slots usable for placement (15 for inner nodes, capacity for leaves).
// Returns the slot that received k and the slot whose used bit was set.
struct SlotInsert {
  unsigned placed;   // slot now holding k
  unsigned used_bit; // slot newly marked used
  unsigned shifted;  // lanes moved to open the slot
};

template <class Lane>
inline SlotInsert slot_insert(Lane* keys,
                                    typename lane_traits<Lane>::mask_type& bitmap,
                                    std::uint16_t& slotuse, unsigned r, Lane k,
                                    unsigned place_cap = lane_traits<Lane>::capacity) {
  using M = typename lane_traits<Lane>::mask_type;
  constexpr unsigned cap = lane_traits<Lane>::capacity;

  // Mask with slots beyond place_cap treated as permanently used.
  M pseudo = bitmap;
  for (unsigned i = place_cap; i < cap; ++i) mark_used(pseudo, i);

  if (r < place_cap && !slot_used(pseudo, r)) {
    keys[r] = k;
    mark_used(bitmap, r);
    ++slotuse;
    return {r, r, 0};
  }

  if (r < place_cap) {
    const unsigned j = next_free(pseudo, r);
    if (j < cap) {
      // Occupied run [r, j) moves one to the right into the gap at j.
      std::memmove(keys + r + 1, keys + r, (j - r) * sizeof(Lane));
      keys[r] = k;
      mark_used(bitmap, j);
      ++slotuse;
      return {r, j, j - r};
    }
  }

  // No free slot to the right: shift the run ending at r-1 into the
  // nearest gap on the left and place k at r-1.
  const unsigned rr = r < place_cap ? r : place_cap;
  const int j = prev_free(pseudo, rr);
  assert(j >= 0);
  const unsigned ju = static_cast<unsigned>(j);
  std::memmove(keys + ju, keys + ju + 1, (rr - 1 - ju) * sizeof(Lane));
  keys[rr - 1] = k;
  mark_used(bitmap, ju);
  ++slotuse;
  return {rr - 1, ju, rr - 1 - ju};
}

// Delete the key whose value run starts at r (the succ_ge hit). The run's
// slots take the next valid key value, or the sentinel when the run ends at
// the last slot; the run's used bit is cleared.
template <class Lane>
inline void slot_delete(Lane* keys, typename lane_traits<Lane>::mask_type& bitmap,
                        std::uint16_t& slotuse, unsigned r) {
  constexpr unsigned cap = lane_traits<Lane>::capacity;
  const unsigned u = next_used(bitmap, r);
  assert(u < cap);
  const Lane next = (u == cap - 1) ? lane_traits<Lane>::sentinel : keys[u + 1];
  for (unsigned i = r; i <= u; ++i) keys[i] = next;
  mark_free(bitmap, u);
  --slotuse;
}

// Lay out `count` sorted lanes with one gap interleaved after every key
// (split layout). When 2*count-1 exceeds the capacity, the surplus keys
// pack at the tail.
template <class Lane>
inline void layout_interleaved(const Lane* sorted, unsigned count, Lane* keys,
                               typename lane_traits<Lane>::mask_type& bitmap,
                               std::uint16_t& slotuse,
                               unsigned cap = lane_traits<Lane>::capacity) {
  assert(count <= cap);
  bitmap = 0;
  slotuse = 0;
  if (count == 0) {
    fill_gap_values(keys, bitmap);
    return;
  }
  const unsigned gaps = count >= cap ? 0 : (cap - count < count - 1 ? cap - count : count - 1);
  unsigned slot = 0;
  for (unsigned i = 0; i < count; ++i) {
    keys[slot] = sorted[i];
    mark_used(bitmap, slot);
    slot += (i < gaps) ? 2 : 1;
  }
  slotuse = static_cast<std::uint16_t>(count);
  fill_gap_values(keys, bitmap);
}

}  // namespace gbt
