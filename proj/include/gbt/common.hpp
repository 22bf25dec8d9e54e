#pragma once

#include <cstdint>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace gbt {

using Key = std::uint64_t;

// Largest representable value is reserved as the trailing-slot sentinel.
// Client keys live in [0, kMaxKey - 1].
inline constexpr Key kMaxKey = std::numeric_limits<Key>::max();

// Offset into a per-level node arena. The arena (inner or leaf) is implied
// by the level of the referencing node.
using NodeRef = std::uint32_t;
inline constexpr NodeRef kNullRef = 0xFFFFFFFFu;

// Every key region is 1024 bits regardless of lane width.
inline constexpr unsigned kRegionBytes = 128;

// Inner nodes: 16 children, at most 15 separator keys. Key slot 15 stays at
// the sentinel so that branching can never select a 17th child.
inline constexpr unsigned kInnerFanout = 16;
inline constexpr unsigned kInnerSepCap = kInnerFanout - 1;

// Lane = element type of a node key region: exact keys (u64) or
// frame-of-reference differences (u32/u16).
template <class Lane>
struct lane_traits;

template <>
struct lane_traits<std::uint64_t> {
  using mask_type = std::uint16_t;
  static constexpr unsigned capacity = 16;
  static constexpr std::uint64_t sentinel = ~std::uint64_t{0};
};

template <>
struct lane_traits<std::uint32_t> {
  using mask_type = std::uint32_t;
  static constexpr unsigned capacity = 32;
  static constexpr std::uint32_t sentinel = ~std::uint32_t{0};
};

template <>
struct lane_traits<std::uint16_t> {
  using mask_type = std::uint64_t;
  static constexpr unsigned capacity = 64;
  static constexpr std::uint16_t sentinel = static_cast<std::uint16_t>(~std::uint16_t{0});
};

enum class TreeMode : std::uint8_t { Plain, Compressed };

// Lane width of a leaf, in bits. Plain trees use Width64 with base 0.
enum class LeafWidth : std::uint8_t { W64 = 64, W32 = 32, W16 = 16 };

inline unsigned leaf_capacity(LeafWidth w) {
  return kRegionBytes * 8u / static_cast<unsigned>(w);
}

// In-node sentinel for a given width: all-ones at that lane size.
inline Key width_sentinel(LeafWidth w) {
  return w == LeafWidth::W64 ? kMaxKey : (Key{1} << static_cast<unsigned>(w)) - 1;
}

struct build_error : std::invalid_argument {
  std::size_t index;
  build_error(const std::string& what, std::size_t idx)
      : std::invalid_argument(what), index(idx) {}
};

struct arena_full : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gbt
