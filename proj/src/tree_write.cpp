#include <algorithm>

#include "tree_internal.hpp"

namespace gbt {

using namespace detail;

bool Tree::insert(Key k) {
  check_client_key(k);
  EpochGuard eg;
  bool result = false;
  unsigned attempt = 0;
  for (;;) {
    OpStatus st = insert_attempt(k, result);
    if (st == OpStatus::SplitPass) {
      // Full parent: the relaxed rule requires a full-path restart that
      // splits full nodes on the way down. Not a contention restart.
      split_restarts_.fetch_add(1, std::memory_order_relaxed);
      st = proactive_pass(k, result);
    }
    if (st == OpStatus::Done) {
      if (result) {
        key_count_.fetch_add(1, std::memory_order_relaxed);
        note_key_bounds(k);
      }
      return result;
    }
    if (st == OpStatus::Retry) {
      ++attempt;
      bump_restarts();
      restart_backoff(attempt);
    }
  }
}

Tree::OpStatus Tree::insert_attempt(Key k, bool& result) {
  Descent d;
  Path path;
  if (!descend(k, d, path)) return OpStatus::Retry;
  LeafAux& la = leaf_aux(d.leaf);
  const bool fits = leaf_insert_fits(d.leaf, k);
  if (!la.lock.validate(d.leaf_version)) return OpStatus::Retry;
  if (fits) {
    if (!la.lock.try_upgrade(d.leaf_version)) return OpStatus::Retry;
    const bool inserted = leaf_insert(d.leaf, k);
    if (inserted)
      la.lock.write_unlock();
    else
      la.lock.write_unlock_unchanged();
    result = inserted;
    return OpStatus::Done;
  }
  return insert_structural(k, d, result);
}

// Full or out-of-range leaf: restructure under (parent, leaf) exclusive
// locks. A restart pass that proactively splits full inner nodes is only
// requested when the parent cannot absorb the separators; proactive gaps
// make that rare.
Tree::OpStatus Tree::insert_structural(Key k, const Descent& d, bool& result) {
  LeafAux& la = leaf_aux(d.leaf);
  const bool root_leaf = d.parent == kNullRef;

  if (root_leaf) {
    if (!anchor_.try_upgrade(d.anchor_version)) return OpStatus::Retry;
    if (!la.lock.try_upgrade(d.leaf_version)) {
      anchor_.write_unlock_unchanged();
      return OpStatus::Retry;
    }
  } else {
    InnerAux& pa = inner_aux(d.parent);
    if (!pa.lock.try_upgrade(d.parent_version)) return OpStatus::Retry;
    if (!la.lock.try_upgrade(d.leaf_version)) {
      pa.lock.write_unlock_unchanged();
      return OpStatus::Retry;
    }
  }
  auto release_parent_unchanged = [&] {
    if (root_leaf)
      anchor_.write_unlock_unchanged();
    else
      inner_aux(d.parent).lock.write_unlock_unchanged();
  };

  unsigned slot;
  if (leaf_find(d.leaf, k, slot)) {
    la.lock.write_unlock_unchanged();
    release_parent_unchanged();
    result = false;
    return OpStatus::Done;
  }

  const unsigned cap = leaf_capacity_of(d.leaf);
  std::vector<Key> keys;
  keys.reserve(cap + 1);
  leaf_keys(d.leaf, keys);

  std::vector<ScratchLeaf> chunks;
  bool retry_insert_into_half = false;  // plain split: k placed afterwards

  if (mode_ == TreeMode::Plain) {
    // Redistribute the existing keys in half with interleaved gaps, then
    // drop k into the correct half.
    const unsigned left_n = static_cast<unsigned>((keys.size() + 1) / 2);
    chunks.resize(2);
    scratch_interleaved(chunks[0], keys.data(), left_n, mode_);
    scratch_interleaved(chunks[1], keys.data() + left_n,
                        static_cast<unsigned>(keys.size()) - left_n, mode_);
    retry_insert_into_half = true;
  } else {
    const auto it = std::lower_bound(keys.begin(), keys.end(), k);
    keys.insert(it, k);
    const bool out_of_range =
        k < la.base || k - la.base >= width_sentinel(la.width);
    if (!out_of_range) {
      // Full leaf, key in range: split in half, re-choosing each half's
      // width with k already part of the distribution.
      const unsigned left_n = static_cast<unsigned>((keys.size() + 1) / 2);
      chunks.resize(2);
      scratch_interleaved(chunks[0], keys.data(), left_n, mode_);
      scratch_interleaved(chunks[1], keys.data() + left_n,
                          static_cast<unsigned>(keys.size()) - left_n, mode_);
    } else {
      // Out-of-range difference: rebuild greedily, re-choosing widths.
      std::size_t pos = 0;
      while (pos < keys.size()) {
        chunks.emplace_back();
        pos += scratch_bulk(chunks.back(), keys.data() + pos, keys.size() - pos,
                            cfg_.alpha_leaf, mode_);
      }
    }
  }

  const unsigned extra = static_cast<unsigned>(chunks.size()) - 1;

  if (extra == 0) {
    // Rebuild collapsed into one leaf (possible when gaps rearrange).
    const ScratchLeaf& s = chunks[0];
    leaf(d.leaf) = s.block;
    la.base = s.base;
    la.bitmap = s.bitmap;
    la.slotuse = s.slotuse;
    la.width = s.width;
    release_parent_unchanged();
    la.lock.write_unlock();
    result = true;
    return OpStatus::Done;
  }

  if (!root_leaf &&
      inner_aux(d.parent).slotuse + extra > kInnerSepCap) {
    la.lock.write_unlock_unchanged();
    release_parent_unchanged();
    return OpStatus::SplitPass;
  }

  // Allocate and wire the new leaves (locks held until fully published).
  // Allocation happens before any mutation so a capacity error leaves the
  // tree untouched and unlocked.
  const NodeRef old_next = la.next;
  std::vector<NodeRef> refs(chunks.size(), kNullRef);
  refs[0] = d.leaf;
  NodeRef new_root = kNullRef;
  try {
    for (std::size_t i = 1; i < chunks.size(); ++i) refs[i] = alloc_leaf();
    if (root_leaf) new_root = alloc_inner();
  } catch (...) {
    for (std::size_t i = 1; i < chunks.size(); ++i)
      if (refs[i] != kNullRef && refs[i] != d.leaf)
        leaf_aux(refs[i]).lock.write_unlock_obsolete();
    la.lock.write_unlock_unchanged();
    release_parent_unchanged();
    throw;
  }
  for (std::size_t i = 1; i < chunks.size(); ++i) {
    const ScratchLeaf& s = chunks[i];
    LeafAux& a = leaf_aux(refs[i]);
    leaf(refs[i]) = s.block;
    a.base = s.base;
    a.bitmap = s.bitmap;
    a.slotuse = s.slotuse;
    a.width = s.width;
    a.next = i + 1 < refs.size() ? refs[i + 1] : old_next;
  }
  {
    const ScratchLeaf& s = chunks[0];
    leaf(d.leaf) = s.block;
    la.base = s.base;
    la.bitmap = s.bitmap;
    la.slotuse = s.slotuse;
    la.width = s.width;
    la.next = refs[1];
  }
  live_leaves_.fetch_add(extra, std::memory_order_relaxed);

  if (root_leaf) {
    const NodeRef nr = new_root;
    InnerNode& rn = inner(nr);
    InnerAux& ra = inner_aux(nr);
    for (auto& key : rn.keys) key = kMaxKey;
    for (auto& c : rn.children) c = kNullRef;
    rn.children[0] = d.leaf;
    ra.bitmap = 0;
    ra.slotuse = 0;
    ra.level = 1;
    for (std::size_t i = 1; i < chunks.size(); ++i)
      inner_insert_sep(nr, chunks[i].first_key, refs[i]);
    live_inners_.fetch_add(1, std::memory_order_relaxed);
    root_.store(nr, std::memory_order_relaxed);
    height_.store(2, std::memory_order_relaxed);
    ra.lock.write_unlock();
    anchor_.write_unlock();
  } else {
    for (std::size_t i = 1; i < chunks.size(); ++i)
      inner_insert_sep(d.parent, chunks[i].first_key, refs[i]);
    inner_aux(d.parent).lock.write_unlock();
  }

  bool inserted = true;
  if (retry_insert_into_half) {
    const NodeRef target = k < chunks[1].first_key ? refs[0] : refs[1];
    inserted = leaf_insert(target, k);
  }
  la.lock.write_unlock();
  for (std::size_t i = 1; i < refs.size(); ++i)
    leaf_aux(refs[i]).lock.write_unlock();

  result = inserted;
  return OpStatus::Done;
}

// Restart pass after a parent could not absorb a separator: split every
// full node met on the way down, pairwise locked, so the next attempt finds
// free slots along the whole path.
Tree::OpStatus Tree::proactive_pass(Key k, bool& result) {
  // Each successful split re-descends from the root (the loop below);
  // only contention failures surface as Retry.
  for (;;) {
    const std::uint64_t av = anchor_.read_lock();
    const NodeRef root = root_.load(std::memory_order_relaxed);
    const unsigned h = height_.load(std::memory_order_relaxed);
    if (!anchor_.validate(av)) return OpStatus::Retry;
    if (h == 1) return OpStatus::Retry;  // root leaf: plain attempt handles it

    NodeRef node = root;
    std::uint64_t v = inner_aux(node).lock.read_lock();
    if (VersionLock::is_obsolete(v)) return OpStatus::Retry;
    if (!anchor_.validate(av)) return OpStatus::Retry;

    if (inner_full(root)) {
      if (!anchor_.try_upgrade(av)) return OpStatus::Retry;
      if (!inner_aux(root).lock.try_upgrade(v)) {
        anchor_.write_unlock_unchanged();
        return OpStatus::Retry;
      }
      split_root_inner(root);
      inner_aux(root).lock.write_unlock();
      anchor_.write_unlock();
      continue;
    }

    unsigned level = h;
    bool redescend = false;
    while (!redescend) {
      const InnerNode& n = inner(node);
      unsigned idx = succ_gt(n.keys, k);
      if (idx >= kInnerFanout) idx = kInnerFanout - 1;
      const NodeRef child = n.children[idx];
      if (child == kNullRef) {
        if (!inner_aux(node).lock.validate(v)) return OpStatus::Retry;
        assert(false && "proactive pass selected a null child");
        return OpStatus::Retry;
      }
      if (level == 2) {
        const std::uint64_t lv = leaf_aux(child).lock.read_lock();
        if (VersionLock::is_obsolete(lv)) return OpStatus::Retry;
        if (!inner_aux(node).lock.validate(v)) return OpStatus::Retry;
        Descent d;
        d.leaf = child;
        d.leaf_version = lv;
        d.parent = node;
        d.parent_version = v;
        d.parent_idx = idx;
        d.anchor_version = av;
        d.depth = 0;
        const bool fits = leaf_insert_fits(child, k);
        if (!leaf_aux(child).lock.validate(lv)) return OpStatus::Retry;
        if (fits) {
          if (!leaf_aux(child).lock.try_upgrade(lv)) return OpStatus::Retry;
          const bool inserted = leaf_insert(child, k);
          if (inserted)
            leaf_aux(child).lock.write_unlock();
          else
            leaf_aux(child).lock.write_unlock_unchanged();
          result = inserted;
          return OpStatus::Done;
        }
        const OpStatus st = insert_structural(k, d, result);
        if (st == OpStatus::SplitPass) {
          redescend = true;  // a racer refilled the parent; split again
          break;
        }
        return st;
      }
      const std::uint64_t cv = inner_aux(child).lock.read_lock();
      if (VersionLock::is_obsolete(cv)) return OpStatus::Retry;
      if (!inner_aux(node).lock.validate(v)) return OpStatus::Retry;
      if (inner_full(child)) {
        if (!inner_aux(node).lock.try_upgrade(v)) return OpStatus::Retry;
        if (!inner_aux(child).lock.try_upgrade(cv)) {
          inner_aux(node).lock.write_unlock_unchanged();
          return OpStatus::Retry;
        }
        split_inner_locked(child, node);
        inner_aux(child).lock.write_unlock();
        inner_aux(node).lock.write_unlock();
        redescend = true;
        break;
      }
      node = child;
      v = cv;
      --level;
    }
  }
}

namespace {

// Interleaved relay of an inner node from packed (separator, child) lists.
void lay_inner(InnerNode& n, InnerAux& a, const Key* seps, unsigned nsep,
               const NodeRef* kids, std::uint8_t level) {
  for (auto& c : n.children) c = kNullRef;
  std::uint16_t m = 0;
  std::uint16_t su = 0;
  Key tmp[kInnerFanout];
  layout_interleaved(seps, nsep, tmp, m, su);
  std::memcpy(n.keys, tmp, sizeof(tmp));
  n.children[0] = kids[0];
  unsigned i = 0;
  for (unsigned slot = next_used(m, 0); slot < kInnerFanout;
       slot = next_used(m, slot + 1)) {
    n.children[slot + 1] = kids[++i];
  }
  a.bitmap = m;
  a.slotuse = su;
  a.level = level;
}

}  // namespace

// Split a full inner node (both it and its parent write-held): the median
// separator moves up, each half re-laid with interleaved gaps.
void Tree::split_inner_locked(NodeRef node, NodeRef parent) {
  InnerNode& n = inner(node);
  InnerAux& a = inner_aux(node);
  Key seps[kInnerSepCap] = {};
  NodeRef kids[kInnerFanout];
  unsigned ns = 0;
  kids[0] = n.children[0];
  for (unsigned slot = next_used(a.bitmap, 0); slot < kInnerFanout;
       slot = next_used(a.bitmap, slot + 1)) {
    seps[ns] = n.keys[slot];
    kids[ns + 1] = n.children[slot + 1];
    ++ns;
  }
  assert(ns == kInnerSepCap);
  const unsigned half = ns / 2;  // 7 separators left, 7 right, median up
  const Key median = seps[half];

  const NodeRef right = alloc_inner();
  lay_inner(inner(right), inner_aux(right), seps + half + 1, ns - half - 1,
            kids + half + 1, a.level);
  lay_inner(n, a, seps, half, kids, a.level);
  live_inners_.fetch_add(1, std::memory_order_relaxed);

  inner_insert_sep(parent, median, right);
  inner_aux(right).lock.write_unlock();
}

// Root split under the anchor: the old root becomes the left half of a new
// root holding a single separator at slot 0 (no gaps at the root).
void Tree::split_root_inner(NodeRef oldroot) {
  InnerNode& n = inner(oldroot);
  InnerAux& a = inner_aux(oldroot);
  Key seps[kInnerSepCap] = {};
  NodeRef kids[kInnerFanout];
  unsigned ns = 0;
  kids[0] = n.children[0];
  for (unsigned slot = next_used(a.bitmap, 0); slot < kInnerFanout;
       slot = next_used(a.bitmap, slot + 1)) {
    seps[ns] = n.keys[slot];
    kids[ns + 1] = n.children[slot + 1];
    ++ns;
  }
  const unsigned half = ns / 2;
  const Key median = seps[half];

  const NodeRef right = alloc_inner();
  lay_inner(inner(right), inner_aux(right), seps + half + 1, ns - half - 1,
            kids + half + 1, a.level);
  lay_inner(n, a, seps, half, kids, a.level);

  const NodeRef nr = alloc_inner();
  InnerNode& rn = inner(nr);
  InnerAux& ra = inner_aux(nr);
  for (auto& key : rn.keys) key = kMaxKey;
  for (auto& c : rn.children) c = kNullRef;
  rn.keys[0] = median;
  rn.children[0] = oldroot;
  rn.children[1] = right;
  ra.bitmap = slot_bit<std::uint16_t>(0);
  ra.slotuse = 1;
  ra.level = static_cast<std::uint8_t>(a.level + 1);
  live_inners_.fetch_add(2, std::memory_order_relaxed);

  inner_aux(right).lock.write_unlock();
  ra.lock.write_unlock();
  root_.store(nr, std::memory_order_relaxed);
  height_.fetch_add(1, std::memory_order_relaxed);
}

// --- deletion ---------------------------------------------------------

bool Tree::erase(Key k) {
  check_client_key(k);
  EpochGuard eg;
  bool result = false;
  for (unsigned attempt = 0;; ++attempt) {
    if (attempt) {
      bump_restarts();
      restart_backoff(attempt);
    }
    if (erase_attempt(k, result) != OpStatus::Done) continue;
    if (result) key_count_.fetch_sub(1, std::memory_order_relaxed);
    return result;
  }
}

Tree::OpStatus Tree::erase_attempt(Key k, bool& result) {
  Descent d;
  Path path;
  if (!descend(k, d, path)) return OpStatus::Retry;
  LeafAux& la = leaf_aux(d.leaf);
  unsigned slot;
  const bool present = leaf_find(d.leaf, k, slot);
  const std::uint16_t su = la.slotuse;
  if (!la.lock.validate(d.leaf_version)) return OpStatus::Retry;
  if (!present) {
    result = false;
    return OpStatus::Done;
  }

  const bool empties = su == 1 && d.parent != kNullRef;
  if (!empties) {
    if (!la.lock.try_upgrade(d.leaf_version)) return OpStatus::Retry;
    const bool erased = leaf_erase(d.leaf, k);
    if (erased)
      la.lock.write_unlock();
    else
      la.lock.write_unlock_unchanged();
    result = erased;
    return OpStatus::Done;
  }

  InnerAux& pa = inner_aux(d.parent);
  if (!pa.lock.try_upgrade(d.parent_version)) return OpStatus::Retry;
  if (!la.lock.try_upgrade(d.leaf_version)) {
    pa.lock.write_unlock_unchanged();
    return OpStatus::Retry;
  }
  const bool erased = leaf_erase(d.leaf, k);
  if (!erased || la.slotuse != 0) {
    pa.lock.write_unlock_unchanged();
    if (erased)
      la.lock.write_unlock();
    else
      la.lock.write_unlock_unchanged();
    result = erased;
    return OpStatus::Done;
  }
  handle_empty_leaf(k, d);
  result = true;
  return OpStatus::Done;
}

// The leaf just went empty under (parent, leaf) locks. With separators in
// the parent the route is removed (copy-back, no merge) and the leaf is
// unlinked from the chain and retired when its predecessor cooperates;
// otherwise it stays as an empty chained leaf that scans skip.
void Tree::handle_empty_leaf(Key k, const Descent& d) {
  LeafAux& la = leaf_aux(d.leaf);
  InnerAux& pa = inner_aux(d.parent);
  if (pa.slotuse == 0) {
    // Sole child of a separator-less parent: keep it as the live target;
    // the next insert in its range revives it.
    pa.lock.write_unlock_unchanged();
    la.lock.write_unlock();
    return;
  }
  inner_remove_child(d.parent, d.parent_idx);
  live_leaves_.fetch_sub(1, std::memory_order_relaxed);
  if (unlink_leaf(k, d.leaf, d)) {
    la.lock.write_unlock_obsolete();
    retire_node(d.leaf, true);
    drain_retired();
  } else {
    la.lock.write_unlock();
  }
  pa.lock.write_unlock();
}

// Locate the chain predecessor of a dead leaf through the (still locked)
// parent: after the separator removal the dead range routes to the left
// adjacent subtree, whose leaf is the predecessor or a few hops before it.
// Gives up rather than waits; a failed unlink just leaves an empty leaf in
// the chain.
bool Tree::unlink_leaf(Key k, NodeRef dead, const Descent& d) {
  if (d.parent_idx == 0) return false;  // predecessor lives outside this parent
  std::lock_guard<std::mutex> sg(structure_mu_);
  const InnerNode& pn = inner(d.parent);
  unsigned idx = succ_gt(pn.keys, k);
  if (idx >= kInnerFanout) idx = kInnerFanout - 1;
  NodeRef p = pn.children[idx];
  if (p == kNullRef || p == dead) return false;
  for (unsigned hops = 0; hops < 8; ++hops) {
    LeafAux& a = leaf_aux(p);
    std::uint64_t pv;
    if (!a.lock.try_read_lock(pv)) return false;
    if (VersionLock::is_obsolete(pv)) return false;
    const NodeRef nxt = a.next;
    if (!a.lock.validate(pv)) return false;
    if (nxt == dead) {
      if (!a.lock.try_upgrade(pv)) return false;
      a.next = leaf_aux(dead).next;
      a.lock.write_unlock();
      return true;
    }
    if (nxt == kNullRef) return false;
    p = nxt;
  }
  return false;
}

}  // namespace gbt
