#pragma once

#include <bit>
#include <concepts>
#include <cstdint>

namespace gbt {

// Occupancy masks are MSB-first: slot 0 is the most significant bit of the
// mask type, so a 16-slot node marks slot r with (0x8000 >> r). The mask
// width always equals the node capacity (u16/u32/u64 for 16/32/64 slots).

template <class M>
concept slot_mask = std::unsigned_integral<M> && sizeof(M) >= 2;

template <slot_mask M>
inline constexpr unsigned mask_slots = sizeof(M) * 8;

template <slot_mask M>
constexpr M slot_bit(unsigned slot) {
  return static_cast<M>(M{1} << (mask_slots<M> - 1)) >> slot;
}

template <slot_mask M>
constexpr bool slot_used(M m, unsigned slot) {
  return (m & slot_bit<M>(slot)) != 0;
}

template <slot_mask M>
constexpr void mark_used(M& m, unsigned slot) {
  m = static_cast<M>(m | slot_bit<M>(slot));
}

template <slot_mask M>
constexpr void mark_free(M& m, unsigned slot) {
  m = static_cast<M>(m & ~slot_bit<M>(slot));
}

// First used slot at or after `from`; returns capacity if none.
template <slot_mask M>
constexpr unsigned next_used(M m, unsigned from) {
  constexpr unsigned n = mask_slots<M>;
  if (from >= n) return n;
  const M window = static_cast<M>(m << from);
  const unsigned lz = static_cast<unsigned>(std::countl_zero(window));
  return lz >= n ? n : from + lz;
}

// Last used slot strictly before `before`; returns -1 if none.
template <slot_mask M>
constexpr int prev_used(M m, unsigned before) {
  constexpr unsigned n = mask_slots<M>;
  if (before == 0) return -1;
  if (before > n) before = n;
  const M window = static_cast<M>(m >> (n - before));
  const unsigned tz = static_cast<unsigned>(std::countr_zero(window));
  return tz >= before ? -1 : static_cast<int>(before - 1 - tz);
}

template <slot_mask M>
constexpr unsigned next_free(M m, unsigned from) {
  return next_used(static_cast<M>(~m), from);
}

template <slot_mask M>
constexpr int prev_free(M m, unsigned before) {
  return prev_used(static_cast<M>(~m), before);
}

template <slot_mask M>
constexpr unsigned used_count(M m) {
  return static_cast<unsigned>(std::popcount(m));
}

// Number of used slots in [0, before).
template <slot_mask M>
constexpr unsigned used_below(M m, unsigned before) {
  constexpr unsigned n = mask_slots<M>;
  if (before == 0) return 0;
  if (before >= n) return used_count(m);
  return used_count(static_cast<M>(m >> (n - before)));
}

}  // namespace gbt
