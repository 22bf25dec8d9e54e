#include <algorithm>

#include "tree_internal.hpp"

namespace gbt {

using namespace detail;

namespace {

std::size_t default_leaf_slots_for(std::size_t n) {
  const std::size_t need = n / 12 + 16;
  std::size_t slots = 1u << 14;
  while (slots < need * 4) slots <<= 1;
  return slots;
}

}  // namespace

Tree Tree::build(std::span<const Key> sorted_keys, BuildConfig cfg) {
  return Tree(sorted_keys, cfg);
}

Tree::Tree(std::span<const Key> sorted_keys, const BuildConfig& cfg)
    : Tree([&] {
        BuildConfig c = cfg;
        if (!c.leaf_arena_slots)
          c.leaf_arena_slots = default_leaf_slots_for(sorted_keys.size());
        if (!c.inner_arena_slots)
          c.inner_arena_slots = c.leaf_arena_slots / 8 + 64;
        return c;
      }()) {
  for (std::size_t i = 0; i < sorted_keys.size(); ++i) {
    if (sorted_keys[i] == kMaxKey)
      throw build_error("reserved key 2^64-1 at index " + std::to_string(i), i);
    if (i > 0 && sorted_keys[i] <= sorted_keys[i - 1])
      throw build_error("input not strictly ascending at index " + std::to_string(i), i);
  }
  switch (cfg.mode) {
    case ModeChoice::Plain:
      mode_ = TreeMode::Plain;
      break;
    case ModeChoice::Compressed:
      mode_ = TreeMode::Compressed;
      break;
    case ModeChoice::Auto:
      mode_ = decide_mode(sorted_keys);
      break;
  }
  bulk_build_impl(sorted_keys);
}

// One pass over the sorted keys: lay out leaves with interleaved gaps at the
// configured fill, collect each leaf's first key as the separator stream,
// then stack inner levels with the fill raised toward packed.
void Tree::bulk_build_impl(std::span<const Key> keys) {
  const std::size_t n = keys.size();
  if (n == 0) return;

  std::vector<NodeRef> refs;
  std::vector<Key> leads;
  refs.reserve(n / 8 + 1);
  leads.reserve(n / 8 + 1);

  std::size_t pos = 0;
  bool first = true;
  while (pos < n) {
    // Reuse the constructor's empty root leaf as the first leaf.
    const NodeRef ref = first ? root_.load(std::memory_order_relaxed)
                              : leaf_->allocate();
    first = false;
    const std::size_t used = fill_leaf(ref, keys.data() + pos, n - pos, cfg_.alpha_leaf);
    if (!refs.empty()) leaf_aux(refs.back()).next = ref;
    leaf_aux(ref).next = kNullRef;
    refs.push_back(ref);
    leads.push_back(keys[pos]);
    pos += used;
  }
  live_leaves_.store(refs.size(), std::memory_order_relaxed);

  unsigned level = 1;
  std::uint64_t inners = 0;
  while (refs.size() > 1) {
    const double alpha =
        std::min(1.0, cfg_.alpha_leaf + cfg_.alpha_growth * static_cast<double>(level));
    const unsigned g = alpha < 1.0 ? gap_every(alpha) : 0;

    std::vector<NodeRef> up_refs;
    std::vector<Key> up_leads;
    std::size_t p = 0;
    while (p < refs.size()) {
      const std::size_t m = refs.size() - p - 1;  // separators on offer
      const NodeRef ref = inner_->allocate();
      InnerNode& nd = inner(ref);
      InnerAux& na = inner_aux(ref);
      std::uint16_t bm = 0;
      std::uint16_t su = 0;
      std::size_t used = fill_region_from_run<Key>(leads.data() + p + 1, m, 0, g,
                                                   kInnerSepCap, nd.keys, bm, su);
      if (m >= 2 && used == m - 1) {
        // Taking all but one separator would strand a lone child; leave two.
        used = fill_region_from_run<Key>(leads.data() + p + 1, m, 0, g,
                                         static_cast<unsigned>(used - 1), nd.keys,
                                         bm, su);
      }
      for (auto& c : nd.children) c = kNullRef;
      nd.children[0] = refs[p];
      unsigned j = 0;
      for (unsigned slot = next_used(bm, 0); slot < kInnerFanout;
           slot = next_used(bm, slot + 1))
        nd.children[slot + 1] = refs[p + 1 + (j++)];
      na.bitmap = bm;
      na.slotuse = su;
      na.level = static_cast<std::uint8_t>(level);
      ++inners;
      up_refs.push_back(ref);
      up_leads.push_back(leads[p]);
      p += used + 1;
    }
    refs.swap(up_refs);
    leads.swap(up_leads);
    ++level;
  }

  live_inners_.store(inners, std::memory_order_relaxed);
  root_.store(refs[0], std::memory_order_relaxed);
  height_.store(level, std::memory_order_relaxed);
  key_count_.store(n, std::memory_order_relaxed);
  min_seen_.store(keys.front(), std::memory_order_relaxed);
  max_seen_.store(keys.back(), std::memory_order_relaxed);
}

}  // namespace gbt
