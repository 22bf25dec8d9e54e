#include <bit>
#include <cmath>

#include "tree_internal.hpp"

namespace gbt {

// Compress-or-not: partition the sorted input into segments of 13 keys (one
// leaf's worth of separators at the default fill), take the leading-zero
// count of each segment's span, and compare the average against half the
// key width. Touches only segment endpoints, so the pass is O(n/13).
double decide_mode_avg_leading_zeros(std::span<const Key> keys) {
  constexpr std::size_t kSegment = 13;
  const std::size_t n = keys.size();
  if (n == 0) return 0.0;
  std::uint64_t total = 0;
  std::size_t segments = 0;
  for (std::size_t i = 0; i < n; i += kSegment) {
    const std::size_t last = i + kSegment - 1 < n ? i + kSegment - 1 : n - 1;
    const Key span = keys[last] - keys[i];
    total += static_cast<std::uint64_t>(std::countl_zero(span));
    ++segments;
  }
  return static_cast<double>(total) / static_cast<double>(segments);
}

TreeMode decide_mode(std::span<const Key> keys) {
  return decide_mode_avg_leading_zeros(keys) >= 32.0 ? TreeMode::Compressed
                                                     : TreeMode::Plain;
}

// Try to fill a leaf with 16-bit differences; if the target occupancy does
// not fit, retry at 32 bits with half the keys, else store exact keys.
LeafWidth pick_leaf_width(const Key* run, std::size_t n, double alpha) {
  for (const LeafWidth w : {LeafWidth::W16, LeafWidth::W32}) {
    const unsigned cap = leaf_capacity(w);
    const std::size_t target =
        static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(cap)));
    const std::size_t m = target < n ? target : n;
    if (m == 0) return w;
    if (run[m - 1] - run[0] < width_sentinel(w)) return w;
  }
  return LeafWidth::W64;
}

}  // namespace gbt
