#include <algorithm>

#include "tree_internal.hpp"

namespace gbt {

using namespace detail;

namespace {

void init_empty_leaf(LeafBlock& b, LeafAux& a) {
  for (auto& k : b.w64) k = kMaxKey;
  a.base = 0;
  a.bitmap = 0;
  a.next = kNullRef;
  a.slotuse = 0;
  a.width = LeafWidth::W64;
}

}  // namespace

Tree::Tree(BuildConfig cfg) : cfg_(cfg) {
  if (cfg.alpha_leaf < 0.5 || cfg.alpha_leaf > 1.0)
    throw std::invalid_argument("alpha_leaf must lie in [0.5, 1.0]");
  const std::size_t ls = cfg.leaf_arena_slots ? cfg.leaf_arena_slots : (1u << 20);
  const std::size_t is = cfg.inner_arena_slots ? cfg.inner_arena_slots : (ls / 8 + 64);
  leaf_ = std::make_unique<LeafArena>(ls);
  inner_ = std::make_unique<InnerArena>(is);
  mode_ = cfg.mode == ModeChoice::Compressed ? TreeMode::Compressed : TreeMode::Plain;

  const NodeRef root = leaf_->allocate();
  init_empty_leaf(leaf(root), leaf_aux(root));
  root_.store(root, std::memory_order_relaxed);
  height_.store(1, std::memory_order_relaxed);
  live_leaves_.store(1, std::memory_order_relaxed);
}

NodeRef Tree::alloc_leaf() {
  NodeRef ref;
  if (leaf_->take_free(ref)) {
    leaf_aux(ref).lock.relock_for_reuse();
    return ref;
  }
  ref = leaf_->allocate();
  // Fresh slots come zeroed; take the lock so initialization is private.
  const std::uint64_t v = leaf_aux(ref).lock.read_lock();
  leaf_aux(ref).lock.try_upgrade(v);
  return ref;
}

NodeRef Tree::alloc_inner() {
  NodeRef ref;
  if (inner_->take_free(ref)) {
    inner_aux(ref).lock.relock_for_reuse();
    return ref;
  }
  ref = inner_->allocate();
  const std::uint64_t v = inner_aux(ref).lock.read_lock();
  inner_aux(ref).lock.try_upgrade(v);
  return ref;
}

void Tree::retire_node(NodeRef ref, bool is_leaf) {
  epochs_.retire(ref, is_leaf);
}

void Tree::drain_retired() {
  std::vector<std::uint32_t> leaves, inners;
  if (epochs_.collect(leaves, inners) == 0) return;
  for (auto r : leaves) leaf_->push_free(r);
  for (auto r : inners) inner_->push_free(r);
}

// --- leaf lane operations --------------------------------------------------

unsigned Tree::leaf_capacity_of(NodeRef ref) const {
  return leaf_capacity(leaf_aux(ref).width);
}

// A succ_gt hit marks the range upper bound only when it lands on a real
// key: trailing sentinel slots mean the bound lies in a later leaf.
bool Tree::leaf_boundary_at(NodeRef ref, unsigned slot) const {
  const LeafAux& a = leaf_aux(ref);
  return with_width(a.width, [&](auto lane) {
    using Lane = decltype(lane);
    if (slot >= lane_traits<Lane>::capacity) return false;
    return lanes_of<Lane>(leaf(ref))[slot] != lane_traits<Lane>::sentinel;
  });
}

unsigned Tree::leaf_succ_ge(NodeRef ref, Key k) const {
  const LeafAux& a = leaf_aux(ref);
  return with_width(a.width, [&](auto lane) {
    using Lane = decltype(lane);
    return leaf_succ_ge_impl(lanes_of<Lane>(leaf(ref)), a.base, k);
  });
}

unsigned Tree::leaf_succ_gt(NodeRef ref, Key k) const {
  const LeafAux& a = leaf_aux(ref);
  return with_width(a.width, [&](auto lane) {
    using Lane = decltype(lane);
    return leaf_succ_gt_impl(lanes_of<Lane>(leaf(ref)), a.base, k);
  });
}

bool Tree::leaf_find(NodeRef ref, Key k, unsigned& slot) const {
  const LeafAux& a = leaf_aux(ref);
  return with_width(a.width, [&](auto lane) {
    using Lane = decltype(lane);
    constexpr unsigned cap = lane_traits<Lane>::capacity;
    if (k < a.base) return false;
    const Key d = k - a.base;
    if (d >= static_cast<Key>(lane_traits<Lane>::sentinel)) return false;
    const Lane* lanes = lanes_of<Lane>(leaf(ref));
    const unsigned r = succ_ge(lanes, static_cast<Lane>(d));
    if (r >= cap || lanes[r] != static_cast<Lane>(d)) return false;
    // succ_ge may land on the first gap of the run duplicating k; the key is
    // present only if the run ends in a used slot still holding k.
    const unsigned u = next_used(mask_of<Lane>(a), r);
    if (u >= cap || lanes[u] != static_cast<Lane>(d)) return false;
    slot = u;
    return true;
  });
}

bool Tree::leaf_insert_fits(NodeRef ref, Key k) const {
  const LeafAux& a = leaf_aux(ref);
  const unsigned cap = leaf_capacity(a.width);
  if (a.slotuse >= cap) return false;
  if (mode_ == TreeMode::Plain) return true;
  return k >= a.base && k - a.base < width_sentinel(a.width);
}

bool Tree::leaf_insert(NodeRef ref, Key k) {
  LeafAux& a = leaf_aux(ref);
  return with_width(a.width, [&](auto lane) {
    using Lane = decltype(lane);
    constexpr unsigned cap = lane_traits<Lane>::capacity;
    Lane* lanes = lanes_of<Lane>(leaf(ref));
    const Lane d = static_cast<Lane>(k - a.base);
    const unsigned r = succ_ge(lanes, d);
    if (r < cap && lanes[r] == d) return false;  // duplicate (used or gapped)
    auto m = mask_of<Lane>(a);
    slot_insert(lanes, m, a.slotuse, r, d);
    a.bitmap = m;
    return true;
  });
}

bool Tree::leaf_erase(NodeRef ref, Key k) {
  LeafAux& a = leaf_aux(ref);
  return with_width(a.width, [&](auto lane) {
    using Lane = decltype(lane);
    constexpr unsigned cap = lane_traits<Lane>::capacity;
    if (k < a.base) return false;
    const Key dk = k - a.base;
    if (dk >= static_cast<Key>(lane_traits<Lane>::sentinel)) return false;
    Lane* lanes = lanes_of<Lane>(leaf(ref));
    const Lane d = static_cast<Lane>(dk);
    const unsigned r = succ_ge(lanes, d);
    if (r >= cap || lanes[r] != d) return false;
    auto m = mask_of<Lane>(a);
    slot_delete(lanes, m, a.slotuse, r);
    a.bitmap = m;
    return true;
  });
}

void Tree::leaf_keys(NodeRef ref, std::vector<Key>& out) const {
  const LeafAux& a = leaf_aux(ref);
  with_width(a.width, [&](auto lane) {
    using Lane = decltype(lane);
    constexpr unsigned cap = lane_traits<Lane>::capacity;
    const Lane* lanes = lanes_of<Lane>(leaf(ref));
    const auto m = mask_of<Lane>(a);
    for (unsigned i = 0; i < cap; ++i)
      if (slot_used(m, i)) out.push_back(a.base + lanes[i]);
  });
}

std::uint64_t Tree::leaf_window_count(NodeRef ref, unsigned from, unsigned to) const {
  const LeafAux& a = leaf_aux(ref);
  return with_width(a.width, [&](auto lane) -> std::uint64_t {
    using Lane = decltype(lane);
    using M = typename lane_traits<Lane>::mask_type;
    return used_count(static_cast<M>(mask_of<Lane>(a) & window_mask<M>(from, to)));
  });
}

void Tree::leaf_window_collect(NodeRef ref, unsigned from, unsigned to,
                               std::vector<Key>& out) const {
  const LeafAux& a = leaf_aux(ref);
  with_width(a.width, [&](auto lane) {
    using Lane = decltype(lane);
    constexpr unsigned cap = lane_traits<Lane>::capacity;
    const Lane* lanes = lanes_of<Lane>(leaf(ref));
    const auto m = mask_of<Lane>(a);
    const unsigned hi = to < cap ? to : cap;
    for (unsigned i = from; i < hi; ++i)
      if (slot_used(m, i)) out.push_back(a.base + lanes[i]);
  });
}

Key Tree::leaf_first_key(NodeRef ref) const {
  const LeafAux& a = leaf_aux(ref);
  return with_width(a.width, [&](auto lane) -> Key {
    using Lane = decltype(lane);
    const auto m = mask_of<Lane>(a);
    const unsigned first = next_used(m, 0);
    if (first >= lane_traits<Lane>::capacity) return kMaxKey;
    return a.base + lanes_of<Lane>(leaf(ref))[first];
  });
}

std::size_t Tree::fill_leaf(NodeRef ref, const Key* keys, std::size_t n, double alpha) {
  LeafAux& a = leaf_aux(ref);
  ScratchLeaf s;
  const std::size_t used = scratch_bulk(s, keys, n, alpha, mode_);
  leaf(ref) = s.block;
  a.base = s.base;
  a.bitmap = s.bitmap;
  a.slotuse = s.slotuse;
  a.width = s.width;
  return used;
}

void Tree::lay_leaf_interleaved(NodeRef ref, const Key* keys, unsigned count) {
  LeafAux& a = leaf_aux(ref);
  ScratchLeaf s;
  scratch_interleaved(s, keys, count, mode_);
  leaf(ref) = s.block;
  a.base = s.base;
  a.bitmap = s.bitmap;
  a.slotuse = s.slotuse;
  a.width = s.width;
}

// --- inner node operations ---------------------------------------------

// Insert (separator, right child) below an already-located route. The child
// paired with key slot j is child slot j+1; shifting a key run drags the
// paired children along, and a placement into a gap only touches that gap's
// unreachable child slot.
void Tree::inner_insert_sep(NodeRef ref, Key sep, NodeRef right_child) {
  InnerNode& n = inner(ref);
  InnerAux& a = inner_aux(ref);
  assert(a.slotuse < kInnerSepCap);
  const unsigned r = succ_ge(n.keys, sep);
  // Slot 15 is never usable for placement.
  const std::uint16_t pseudo = static_cast<std::uint16_t>(a.bitmap | 0x0001u);

  if (r < kInnerSepCap && !slot_used(pseudo, r)) {
    n.keys[r] = sep;
    n.children[r + 1] = right_child;
    mark_used(a.bitmap, r);
    ++a.slotuse;
    return;
  }
  if (r < kInnerSepCap) {
    const unsigned j = next_free(pseudo, r);
    if (j < kInnerFanout) {
      std::memmove(n.keys + r + 1, n.keys + r, (j - r) * sizeof(Key));
      std::memmove(n.children + r + 2, n.children + r + 1, (j - r) * sizeof(NodeRef));
      n.keys[r] = sep;
      n.children[r + 1] = right_child;
      mark_used(a.bitmap, j);
      ++a.slotuse;
      return;
    }
  }
  const unsigned rr = r < kInnerSepCap ? r : kInnerSepCap;
  const int j = prev_free(pseudo, rr);
  assert(j >= 0);
  const unsigned ju = static_cast<unsigned>(j);
  std::memmove(n.keys + ju, n.keys + ju + 1, (rr - 1 - ju) * sizeof(Key));
  std::memmove(n.children + ju + 1, n.children + ju + 2, (rr - 1 - ju) * sizeof(NodeRef));
  n.keys[rr - 1] = sep;
  n.children[rr] = right_child;
  mark_used(a.bitmap, ju);
  ++a.slotuse;
}

// Drop the route to a dead child: the separator's value run takes the next
// key value (copy semantics, no merge) and the dead child slot becomes
// unreachable. For the leftmost child the next live child takes its place.
void Tree::inner_remove_child(NodeRef ref, unsigned child_idx) {
  InnerNode& n = inner(ref);
  InnerAux& a = inner_aux(ref);
  assert(a.slotuse > 0);
  unsigned sep_slot;
  if (child_idx == 0) {
    sep_slot = next_used(a.bitmap, 0);
    assert(sep_slot < kInnerSepCap);
    if (sep_slot >= kInnerSepCap) return;
    n.children[0] = n.children[sep_slot + 1];
    n.children[sep_slot + 1] = kNullRef;
  } else {
    sep_slot = child_idx - 1;
    assert(slot_used(a.bitmap, sep_slot));
    n.children[child_idx] = kNullRef;
  }
  const unsigned first = static_cast<unsigned>(prev_used(a.bitmap, sep_slot) + 1);
  const Key next = n.keys[sep_slot + 1];
  for (unsigned i = first; i <= sep_slot; ++i) n.keys[i] = next;
  mark_free(a.bitmap, sep_slot);
  --a.slotuse;
}

void Tree::note_key_bounds(Key k) {
  Key cur = min_seen_.load(std::memory_order_relaxed);
  while (k < cur &&
         !min_seen_.compare_exchange_weak(cur, k, std::memory_order_relaxed)) {
  }
  cur = max_seen_.load(std::memory_order_relaxed);
  while (k > cur &&
         !max_seen_.compare_exchange_weak(cur, k, std::memory_order_relaxed)) {
  }
}

}  // namespace gbt
