#include "tree_internal.hpp"

namespace gbt {

using namespace detail;

// Optimistic root-to-leaf descent. Every node's version is read before its
// key region is consumed and checked afterwards; the child's version is
// pinned before the parent is released so a concurrent split cannot slip
// between route computation and entry. Returns false to restart.
bool Tree::descend(Key k, Descent& d, Path& path) const {
  d.anchor_version = anchor_.read_lock();
  const NodeRef root = root_.load(std::memory_order_relaxed);
  const unsigned h = height_.load(std::memory_order_relaxed);
  if (!anchor_.validate(d.anchor_version)) return false;

  if (h == 1) {
    const std::uint64_t lv = leaf_aux(root).lock.read_lock();
    if (VersionLock::is_obsolete(lv)) return false;
    if (!anchor_.validate(d.anchor_version)) return false;
    d.leaf = root;
    d.leaf_version = lv;
    d.parent = kNullRef;
    d.parent_version = 0;
    d.parent_idx = 0;
    d.depth = 0;
    return true;
  }

  NodeRef node = root;
  std::uint64_t v = inner_aux(node).lock.read_lock();
  if (VersionLock::is_obsolete(v)) return false;
  if (!anchor_.validate(d.anchor_version)) return false;

  unsigned level = h;
  unsigned depth = 0;
  for (;;) {
    const InnerNode& n = inner(node);
    unsigned idx = succ_gt(n.keys, k);
    if (idx >= kInnerFanout) idx = kInnerFanout - 1;  // torn read guard
    const NodeRef child = n.children[idx];
    if (depth < path.size()) path[depth] = {node, v, idx};
    if (child == kNullRef) {
      // A validated route never selects an unreachable child slot.
      if (!inner_aux(node).lock.validate(v)) return false;
      assert(false && "descent selected a null child");
      return false;
    }
    if (level == 2) {
      __builtin_prefetch(&leaf(child));
      const std::uint64_t lv = leaf_aux(child).lock.read_lock();
      if (VersionLock::is_obsolete(lv)) return false;
      if (!inner_aux(node).lock.validate(v)) return false;
      d.leaf = child;
      d.leaf_version = lv;
      d.parent = node;
      d.parent_version = v;
      d.parent_idx = idx;
      d.depth = depth + 1;
      return true;
    }
    __builtin_prefetch(&inner(child));
    const std::uint64_t cv = inner_aux(child).lock.read_lock();
    if (VersionLock::is_obsolete(cv)) return false;
    if (!inner_aux(node).lock.validate(v)) return false;
    node = child;
    v = cv;
    --level;
    ++depth;
  }
}

Tree::LookupResult Tree::lookup(Key k) const {
  check_client_key(k);
  EpochGuard eg;
  Descent d;
  Path path;
  for (unsigned attempt = 0;; ++attempt) {
    if (attempt) {
      bump_restarts();
      restart_backoff(attempt);
    }
    if (!descend(k, d, path)) continue;
    unsigned slot = 0;
    const bool found = leaf_find(d.leaf, k, slot);
    if (!leaf_aux(d.leaf).lock.validate(d.leaf_version)) continue;
    return {found, d.leaf, slot};
  }
}

// --- range search -----------------------------------------------------

namespace {
struct LeafSnap {
  unsigned r2 = 0;        // first slot past hi, capacity if none
  unsigned cap = 0;
  std::uint16_t slotuse = 0;
  NodeRef next = kNullRef;
  Key last_key = 0;       // largest qualifying key in this leaf
  std::uint64_t cnt = 0;
};
}  // namespace

// Walk the leaf chain accumulating validated per-leaf windows. On a
// validation failure the scan re-descends for the first key after the last
// confirmed one instead of abandoning accumulated results.
Tree::RangeResult Tree::range_chain(Key lo, Key hi) const {
  check_client_key(lo);
  check_client_key(hi);
  if (lo > hi) throw std::invalid_argument("range bounds out of order");
  EpochGuard eg;

  RangeResult res{{kNullRef, 0}, {kNullRef, 0}, 0};
  bool begin_set = false;
  Key k1 = lo;
  std::vector<Key> scratch;

  for (unsigned attempt = 0;; ++attempt) {
    if (attempt) {
      bump_restarts();
      restart_backoff(attempt);
    }
    Descent d;
    Path path;
    if (!descend(k1, d, path)) continue;

    NodeRef cur = d.leaf;
    std::uint64_t v = d.leaf_version;
    bool first = true;
    bool failed = false;
    while (true) {
      const LeafAux& a = leaf_aux(cur);
      LeafSnap s;
      s.cap = leaf_capacity(a.width);
      s.slotuse = a.slotuse;
      s.next = a.next;
      const unsigned r1 = first ? leaf_succ_ge(cur, k1) : 0;
      s.r2 = leaf_succ_gt(cur, hi);
      // The bound is here only if succ_gt landed on a real key; a sentinel
      // slot means every key of this leaf qualifies and the walk continues.
      const bool boundary_here = leaf_boundary_at(cur, s.r2);
      s.cnt = leaf_window_count(cur, r1, s.r2);
      if (s.cnt) {
        scratch.clear();
        leaf_window_collect(cur, r1, s.r2, scratch);
        s.last_key = scratch.empty() ? 0 : scratch.back();
      }
      if (!a.lock.validate(v)) {
        failed = true;
        break;
      }
      // Committed: this leaf's window is part of the result.
      if (s.cnt) {
        if (!begin_set) {
          res.begin = {cur, r1};
          begin_set = true;
        }
        res.count += s.cnt;
        if (s.last_key == hi) {  // nothing past hi can qualify
          res.end = {cur, s.r2};
          return res;
        }
        k1 = s.last_key + 1;
      }
      if (boundary_here) {
        res.end = {cur, s.r2};
        return res;
      }
      if (s.next == kNullRef) {
        res.end = {cur, s.cap};
        return res;
      }
      const std::uint64_t nv = leaf_aux(s.next).lock.read_lock();
      if (VersionLock::is_obsolete(nv) || !a.lock.validate(v)) {
        failed = true;
        break;
      }
      cur = s.next;
      v = nv;
      first = false;
    }
    if (failed) continue;  // re-descend from just past the last confirmed key
  }
}

Tree::RangeResult Tree::range_two_descent(Key lo, Key hi) const {
  check_client_key(lo);
  check_client_key(hi);
  if (lo > hi) throw std::invalid_argument("range bounds out of order");
  EpochGuard eg;

  for (unsigned attempt = 0;; ++attempt) {
    if (attempt) {
      bump_restarts();
      restart_backoff(attempt);
    }
    Descent dl, dr;
    Path path;
    if (!descend(lo, dl, path)) continue;
    const unsigned r1 = leaf_succ_ge(dl.leaf, lo);
    if (!leaf_aux(dl.leaf).lock.validate(dl.leaf_version)) continue;

    if (!descend(hi, dr, path)) continue;
    const unsigned r2_end = leaf_succ_gt(dr.leaf, hi);
    if (!leaf_aux(dr.leaf).lock.validate(dr.leaf_version)) continue;

    // Walk lo's leaf toward hi's leaf accumulating occupancy popcounts.
    RangeResult res{{dl.leaf, r1}, {dr.leaf, r2_end}, 0};
    NodeRef cur = dl.leaf;
    std::uint64_t v = dl.leaf_version;
    bool ok = true;
    bool first = true;
    while (true) {
      const LeafAux& a = leaf_aux(cur);
      const unsigned cap = leaf_capacity(a.width);
      const bool last = cur == dr.leaf;
      const unsigned from = first ? r1 : 0;
      const unsigned to = last ? r2_end : cap;
      const std::uint64_t cnt = from < to ? leaf_window_count(cur, from, to) : 0;
      const NodeRef next = a.next;
      if (!a.lock.validate(v)) {
        ok = false;
        break;
      }
      res.count += cnt;
      if (last) break;
      if (next == kNullRef) {  // hi's leaf moved meanwhile
        ok = false;
        break;
      }
      const std::uint64_t nv = leaf_aux(next).lock.read_lock();
      if (VersionLock::is_obsolete(nv) || !a.lock.validate(v)) {
        ok = false;
        break;
      }
      cur = next;
      v = nv;
      first = false;
    }
    if (ok) return res;
  }
}

Tree::RangeResult Tree::range(Key lo, Key hi) const {
  // Chain walk costs one successor per result leaf; the two-descent variant
  // pays one extra descent instead and wins when the range spans more
  // leaves than the tree is tall.
  const Key minv = min_seen_.load(std::memory_order_relaxed);
  const Key maxv = max_seen_.load(std::memory_order_relaxed);
  const std::uint64_t leaves = live_leaves_.load(std::memory_order_relaxed);
  const unsigned h = height_.load(std::memory_order_relaxed);
  if (maxv > minv && leaves > 0) {
    const long double span = static_cast<long double>(maxv - minv);
    const long double est_leaves =
        static_cast<long double>(hi - lo) / span * static_cast<long double>(leaves);
    if (est_leaves > static_cast<long double>(h)) return range_two_descent(lo, hi);
  }
  return range_chain(lo, hi);
}

std::size_t Tree::range_collect(Key lo, Key hi, std::vector<Key>& out) const {
  check_client_key(lo);
  check_client_key(hi);
  if (lo > hi) throw std::invalid_argument("range bounds out of order");
  EpochGuard eg;

  const std::size_t start = out.size();
  Key k1 = lo;
  std::vector<Key> scratch;
  for (unsigned attempt = 0;; ++attempt) {
    if (attempt) {
      bump_restarts();
      restart_backoff(attempt);
    }
    Descent d;
    Path path;
    if (!descend(k1, d, path)) continue;
    NodeRef cur = d.leaf;
    std::uint64_t v = d.leaf_version;
    bool first = true;
    bool failed = false;
    while (true) {
      const LeafAux& a = leaf_aux(cur);
      const NodeRef next = a.next;
      const unsigned r1 = first ? leaf_succ_ge(cur, k1) : 0;
      const unsigned r2 = leaf_succ_gt(cur, hi);
      const bool boundary_here = leaf_boundary_at(cur, r2);
      scratch.clear();
      leaf_window_collect(cur, r1, r2, scratch);
      if (!a.lock.validate(v)) {
        failed = true;
        break;
      }
      out.insert(out.end(), scratch.begin(), scratch.end());
      if (!scratch.empty()) {
        if (scratch.back() == hi) break;
        k1 = scratch.back() + 1;
      }
      if (boundary_here) break;
      if (next == kNullRef) break;
      const std::uint64_t nv = leaf_aux(next).lock.read_lock();
      if (VersionLock::is_obsolete(nv) || !a.lock.validate(v)) {
        failed = true;
        break;
      }
      cur = next;
      v = nv;
      first = false;
    }
    if (!failed) return out.size() - start;
  }
}

void Tree::scan_all(std::vector<Key>& out) const {
  // Quiescent-tree helper: plain chain walk from the leftmost leaf.
  NodeRef node = root_.load(std::memory_order_relaxed);
  unsigned level = height_.load(std::memory_order_relaxed);
  while (level > 1) {
    node = inner(node).children[0];
    --level;
  }
  while (node != kNullRef) {
    leaf_keys(node, out);
    node = leaf_aux(node).next;
  }
}

}  // namespace gbt
