#pragma once

#include <cassert>
#include <cstring>
#include <vector>

#include "gbt/node_ops.hpp"
#include "gbt/nodes.hpp"
#include "gbt/succ.hpp"
#include "gbt/tree.hpp"

namespace gbt::detail {

// Run `fn` with the lane type matching a leaf width.
template <class Fn>
decltype(auto) with_width(LeafWidth w, Fn&& fn) {
  switch (w) {
    case LeafWidth::W32:
      return fn(std::uint32_t{});
    case LeafWidth::W16:
      return fn(std::uint16_t{});
    case LeafWidth::W64:
    default:
      return fn(std::uint64_t{});
  }
}

template <class Lane>
Lane* lanes_of(LeafBlock& b) {
  if constexpr (sizeof(Lane) == 8) return b.w64;
  else if constexpr (sizeof(Lane) == 4) return b.w32;
  else return b.w16;
}

template <class Lane>
const Lane* lanes_of(const LeafBlock& b) {
  if constexpr (sizeof(Lane) == 8) return b.w64;
  else if constexpr (sizeof(Lane) == 4) return b.w32;
  else return b.w16;
}

template <class Lane>
typename lane_traits<Lane>::mask_type mask_of(const LeafAux& a) {
  return static_cast<typename lane_traits<Lane>::mask_type>(a.bitmap);
}

// Clamped successor in the difference domain. Equivalent to evaluating the
// successor over the decompressed keys: the upper clamp differs per mode so
// that real differences at the top of the width range still count while
// sentinel slots never do.
template <class Lane>
unsigned leaf_succ_ge_impl(const Lane* lanes, Key base, Key k) {
  if (k <= base) return 0;
  const Key d = k - base;
  const Key sent = static_cast<Key>(lane_traits<Lane>::sentinel);
  return succ_ge(lanes, static_cast<Lane>(d < sent ? d : sent));
}

template <class Lane>
unsigned leaf_succ_gt_impl(const Lane* lanes, Key base, Key k) {
  if (k < base) return 0;
  const Key d = k - base;
  const Key sent = static_cast<Key>(lane_traits<Lane>::sentinel);
  return succ_gt(lanes, static_cast<Lane>(d < sent ? d : sent - 1));
}

// Bits covering slots [from, to) of a capacity-wide MSB-first mask.
template <class M>
M window_mask(unsigned from, unsigned to) {
  constexpr unsigned n = mask_slots<M>;
  const M all = static_cast<M>(~M{0});
  const M below_to = to == 0 ? M{0} : static_cast<M>(all << (n - (to < n ? to : n)));
  const M below_from = from == 0 ? M{0} : static_cast<M>(all << (n - (from < n ? from : n)));
  return static_cast<M>(below_to & ~below_from);
}

// Gap placement pattern used by bulk loading: one gap after every `g` keys.
inline unsigned gap_every(double alpha) {
  if (alpha >= 1.0) return 0;  // packed
  const unsigned stride = static_cast<unsigned>(1.0 / (1.0 - alpha));
  return stride > 1 ? stride - 1 : 1;
}

// Fill a key region from the head of a sorted run of absolute keys, placing
// one gap after every `g` keys. A gap between numerically consecutive keys
// is skipped and the slot absorbs the next key instead. Keys whose
// difference from `base` no longer fits end the node early. Returns the
// number of keys consumed.
template <class Lane>
std::size_t fill_region_from_run(const Key* keys, std::size_t n, Key base,
                                 unsigned g, unsigned max_key_slots,
                                 Lane* lanes,
                                 typename lane_traits<Lane>::mask_type& bm,
                                 std::uint16_t& slotuse) {
  constexpr unsigned cap = lane_traits<Lane>::capacity;
  const Key maxdiff = static_cast<Key>(lane_traits<Lane>::sentinel);
  bm = 0;
  slotuse = 0;
  std::size_t i = 0;
  for (unsigned slot = 0; slot < cap; ++slot) {
    if (i >= n || slotuse >= max_key_slots) break;
    const bool fits = keys[i] - base < maxdiff;
    if (!fits) break;
    const bool gap_pos = (g > 0 && slot % (g + 1) == g) || slot >= max_key_slots;
    if (gap_pos) {
      const bool consecutive = i > 0 && keys[i] == keys[i - 1] + 1;
      if (!(consecutive && slot < max_key_slots)) continue;  // leave the gap
    }
    lanes[slot] = static_cast<Lane>(keys[i] - base);
    mark_used(bm, slot);
    ++slotuse;
    ++i;
  }
  fill_gap_values(lanes, bm);
  return i;
}

// Staged leaf image used by splits and compressed-leaf rebuilds: laid out
// off to the side, committed into arena slots once the parent has room.
struct ScratchLeaf {
  LeafBlock block;
  std::uint64_t bitmap;
  std::uint16_t slotuse;
  LeafWidth width;
  Key base;
  Key first_key;
};

// Narrowest width able to hold `count` keys spanning [first, last] in one
// node. Used when redistributing a known key set (splits).
inline LeafWidth width_for_span(Key first, Key last, unsigned count) {
  const Key span = last - first;
  if (span < width_sentinel(LeafWidth::W16) && count <= leaf_capacity(LeafWidth::W16))
    return LeafWidth::W16;
  if (span < width_sentinel(LeafWidth::W32) && count <= leaf_capacity(LeafWidth::W32))
    return LeafWidth::W32;
  return LeafWidth::W64;
}

// Interleaved (one gap per key) scratch layout of an absolute-key run.
inline void scratch_interleaved(ScratchLeaf& s, const Key* keys, unsigned count,
                                TreeMode mode) {
  s.first_key = count ? keys[0] : kMaxKey;
  if (mode == TreeMode::Plain) {
    s.width = LeafWidth::W64;
    s.base = 0;
  } else {
    s.width = count ? width_for_span(keys[0], keys[count - 1], count) : LeafWidth::W64;
    s.base = count ? keys[0] : 0;
  }
  with_width(s.width, [&](auto lane) {
    using Lane = decltype(lane);
    std::vector<Lane> rebased(count);
    for (unsigned i = 0; i < count; ++i)
      rebased[i] = static_cast<Lane>(keys[i] - s.base);
    typename lane_traits<Lane>::mask_type m{};
    layout_interleaved(rebased.data(), count, lanes_of<Lane>(s.block), m, s.slotuse);
    s.bitmap = m;
  });
}

// Bulk-pattern scratch layout taken greedily from a run; returns keys consumed.
inline std::size_t scratch_bulk(ScratchLeaf& s, const Key* keys, std::size_t n,
                                double alpha, TreeMode mode) {
  s.first_key = keys[0];
  if (mode == TreeMode::Plain) {
    s.width = LeafWidth::W64;
    s.base = 0;
  } else {
    s.width = pick_leaf_width(keys, n, alpha);
    s.base = keys[0];
  }
  return with_width(s.width, [&](auto lane) -> std::size_t {
    using Lane = decltype(lane);
    typename lane_traits<Lane>::mask_type m{};
    const std::size_t used = fill_region_from_run<Lane>(
        keys, n, s.base, gap_every(alpha), lane_traits<Lane>::capacity,
        lanes_of<Lane>(s.block), m, s.slotuse);
    s.bitmap = m;
    return used;
  });
}

}  // namespace gbt::detail
