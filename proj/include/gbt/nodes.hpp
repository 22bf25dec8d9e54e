#pragma once

#include <cstdint>

#include "gbt/common.hpp"
#include "gbt/optimistic_lock.hpp"

namespace gbt {

// Inner node: 16 exact keys (two cache lines) plus 16 child offsets. At most
// 15 key slots are ever used so that branching cannot select a 17th child;
// slot 15 stays at the sentinel. Auxiliary data lives in a parallel array so
// the key region stays pure for vector loads.
struct alignas(64) InnerNode {
  Key keys[kInnerFanout];
  NodeRef children[kInnerFanout];
};
static_assert(sizeof(InnerNode) == 192);

// Leaf key region: 1024 bits viewed as 16/32/64 lanes depending on width.
struct alignas(64) LeafBlock {
  union {
    std::uint64_t w64[16];
    std::uint32_t w32[32];
    std::uint16_t w16[64];
  };
};
static_assert(sizeof(LeafBlock) == kRegionBytes);

struct InnerAux {
  VersionLock lock;
  std::uint16_t bitmap;   // used separator slots, slot 0 = bit 15
  std::uint16_t slotuse;
  std::uint8_t level;     // height above the leaf level (>= 1)
  std::uint8_t pad_[3];
};
static_assert(sizeof(InnerAux) == 16);

struct LeafAux {
  VersionLock lock;
  Key base;               // FOR base key; 0 in plain mode
  std::uint64_t bitmap;   // used slots in the low `capacity` bits, MSB-first
  NodeRef next;           // next leaf in key order, kNullRef at the tail
  std::uint16_t slotuse;
  LeafWidth width;
  std::uint8_t pad_[1];
};
static_assert(sizeof(LeafAux) == 32);

}  // namespace gbt
