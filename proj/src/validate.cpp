#include <functional>
#include <sstream>

#include "tree_internal.hpp"

namespace gbt {

using namespace detail;

namespace {

struct Walker {
  std::string error;
  std::vector<NodeRef> reachable_leaves;
  std::uint64_t keys_seen = 0;
  std::uint64_t w16 = 0, w32 = 0, w64 = 0;
  std::uint64_t inners = 0;

  bool fail(const std::string& msg) {
    if (error.empty()) error = msg;
    return false;
  }
};

template <class Lane>
bool check_region(Walker& w, const Lane* lanes,
                  typename lane_traits<Lane>::mask_type bm, unsigned slotuse,
                  unsigned place_cap, const char* what, NodeRef ref) {
  constexpr unsigned cap = lane_traits<Lane>::capacity;
  std::ostringstream id;
  id << what << " " << ref;
  if (used_count(bm) != slotuse)
    return w.fail(id.str() + ": bitmap popcount != slotuse");
  for (unsigned i = 0; i + 1 < cap; ++i)
    if (lanes[i] > lanes[i + 1])
      return w.fail(id.str() + ": keys not monotonic at slot " + std::to_string(i));
  // Gap rule: every unused slot duplicates the next used key or the sentinel.
  Lane carry = lane_traits<Lane>::sentinel;
  for (int i = static_cast<int>(cap) - 1; i >= 0; --i) {
    const unsigned s = static_cast<unsigned>(i);
    if (slot_used(bm, s)) {
      carry = lanes[s];
    } else if (lanes[s] != carry) {
      return w.fail(id.str() + ": gap slot " + std::to_string(s) +
                    " does not duplicate the next used key");
    }
  }
  // Used values strictly increase (keys are unique) and stay below the
  // sentinel; slots past place_cap must be unused.
  bool have_prev = false;
  Lane prev{};
  for (unsigned i = 0; i < cap; ++i) {
    if (!slot_used(bm, i)) continue;
    if (i >= place_cap)
      return w.fail(id.str() + ": used slot beyond placement capacity");
    if (lanes[i] == lane_traits<Lane>::sentinel)
      return w.fail(id.str() + ": used slot holds the sentinel");
    if (have_prev && lanes[i] <= prev)
      return w.fail(id.str() + ": duplicate or unordered used keys");
    prev = lanes[i];
    have_prev = true;
  }
  return true;
}

}  // namespace

Tree::ValidationReport Tree::validate() const {
  Walker w;
  const NodeRef root = root_.load(std::memory_order_relaxed);
  const unsigned h = height_.load(std::memory_order_relaxed);

  // Recursive structural checks with per-subtree key windows.
  auto check_leaf_node = [&](NodeRef ref, Key lower, Key upper) -> bool {
    const LeafAux& a = leaf_aux(ref);
    if (mode_ == TreeMode::Plain &&
        (a.width != LeafWidth::W64 || a.base != 0))
      return w.fail("leaf " + std::to_string(ref) + ": plain tree expects w64/base 0");
    const bool ok = with_width(a.width, [&](auto lane) {
      using Lane = decltype(lane);
      constexpr unsigned cap = lane_traits<Lane>::capacity;
      if (!check_region<Lane>(w, lanes_of<Lane>(leaf(ref)), mask_of<Lane>(a),
                              a.slotuse, cap, "leaf", ref))
        return false;
      const auto m = mask_of<Lane>(a);
      const Lane* lanes = lanes_of<Lane>(leaf(ref));
      for (unsigned i = next_used(m, 0); i < cap; i = next_used(m, i + 1)) {
        const Key k = a.base + lanes[i];
        if (k < lower || (upper != kMaxKey && k >= upper))
          return w.fail("leaf " + std::to_string(ref) + ": key outside separator window");
        ++w.keys_seen;
      }
      return true;
    });
    if (!ok) return false;
    switch (a.width) {
      case LeafWidth::W16: ++w.w16; break;
      case LeafWidth::W32: ++w.w32; break;
      case LeafWidth::W64: ++w.w64; break;
    }
    w.reachable_leaves.push_back(ref);
    return true;
  };

  std::function<bool(NodeRef, unsigned, Key, Key)> rec =
      [&](NodeRef ref, unsigned level, Key lower, Key upper) -> bool {
    if (level == 1) return check_leaf_node(ref, lower, upper);
    const InnerNode& n = inner(ref);
    const InnerAux& a = inner_aux(ref);
    ++w.inners;
    if (a.level != level - 1)
      return w.fail("inner " + std::to_string(ref) + ": level mismatch");
    if (n.keys[kInnerFanout - 1] != kMaxKey)
      return w.fail("inner " + std::to_string(ref) + ": slot 15 not sentinel");
    if (!check_region<Key>(w, n.keys, a.bitmap, a.slotuse, kInnerSepCap, "inner", ref))
      return false;
    // Children: leftmost plus one per used separator, windows from the
    // separator values.
    Key lo = lower;
    NodeRef child = n.children[0];
    if (child == kNullRef)
      return w.fail("inner " + std::to_string(ref) + ": null leftmost child");
    for (unsigned s = next_used(a.bitmap, 0); s <= kInnerFanout;) {
      const Key sep = s < kInnerFanout ? n.keys[s] : upper;
      if (!rec(child, level - 1, lo, sep)) return false;
      if (s >= kInnerFanout) break;
      child = n.children[s + 1];
      if (child == kNullRef)
        return w.fail("inner " + std::to_string(ref) + ": null routed child");
      lo = sep;
      const unsigned nxt = next_used(a.bitmap, s + 1);
      if (nxt >= kInnerFanout) {
        if (!rec(child, level - 1, lo, upper)) return false;
        break;
      }
      s = nxt;
    }
    return true;
  };

  ValidationReport rep;
  if (!rec(root, h, 0, kMaxKey)) {
    rep.ok = false;
    rep.error = w.error;
    return rep;
  }

  // Leaf chain: reachable leaves appear in order; interleaved unreachable
  // leaves must be empty leftovers; keys ascend globally.
  if (!w.reachable_leaves.empty()) {
    NodeRef cur = w.reachable_leaves.front();
    std::size_t idx = 0;
    Key prev_key = 0;
    bool have_prev = false;
    std::uint64_t chained_keys = 0;
    std::vector<Key> buf;
    while (cur != kNullRef) {
      const bool expected = idx < w.reachable_leaves.size() &&
                            w.reachable_leaves[idx] == cur;
      buf.clear();
      leaf_keys(cur, buf);
      if (!expected && !buf.empty()) {
        rep.ok = false;
        rep.error = "chained leaf " + std::to_string(cur) +
                    " is not descent-reachable yet holds keys";
        return rep;
      }
      for (Key k : buf) {
        if (have_prev && k <= prev_key) {
          rep.ok = false;
          rep.error = "leaf chain keys not strictly ascending";
          return rep;
        }
        prev_key = k;
        have_prev = true;
        ++chained_keys;
      }
      if (expected) ++idx;
      cur = leaf_aux(cur).next;
    }
    if (idx != w.reachable_leaves.size()) {
      rep.ok = false;
      rep.error = "leaf chain misses " +
                  std::to_string(w.reachable_leaves.size() - idx) +
                  " reachable leaves";
      return rep;
    }
    if (chained_keys != w.keys_seen) {
      rep.ok = false;
      rep.error = "chain key count disagrees with descent";
      return rep;
    }
  }

  if (w.keys_seen != key_count_.load(std::memory_order_relaxed)) {
    rep.ok = false;
    rep.error = "key_count " +
                std::to_string(key_count_.load(std::memory_order_relaxed)) +
                " != keys present " + std::to_string(w.keys_seen);
    return rep;
  }
  return rep;
}

Tree::Stats Tree::stats() const {
  Walker w;
  const NodeRef root = root_.load(std::memory_order_relaxed);
  const unsigned h = height_.load(std::memory_order_relaxed);

  std::function<void(NodeRef, unsigned)> rec = [&](NodeRef ref, unsigned level) {
    if (level == 1) {
      const LeafAux& a = leaf_aux(ref);
      switch (a.width) {
        case LeafWidth::W16: ++w.w16; break;
        case LeafWidth::W32: ++w.w32; break;
        case LeafWidth::W64: ++w.w64; break;
      }
      w.reachable_leaves.push_back(ref);
      return;
    }
    ++w.inners;
    const InnerNode& n = inner(ref);
    const InnerAux& a = inner_aux(ref);
    rec(n.children[0], level - 1);
    for (unsigned s = next_used(a.bitmap, 0); s < kInnerFanout;
         s = next_used(a.bitmap, s + 1))
      rec(n.children[s + 1], level - 1);
  };
  rec(root, h);

  Stats st{};
  st.mode = mode_;
  st.height = h;
  st.key_count = key_count_.load(std::memory_order_relaxed);
  st.leaf_count = w.reachable_leaves.size();
  st.inner_count = w.inners;
  st.leaves_w16 = w.w16;
  st.leaves_w32 = w.w32;
  st.leaves_w64 = w.w64;
  st.arena_bytes = leaf_->allocated() * sizeof(LeafBlock) +
                   inner_->allocated() * sizeof(InnerNode);
  st.aux_bytes = leaf_->allocated() * sizeof(LeafAux) +
                 inner_->allocated() * sizeof(InnerAux);
  return st;
}

}  // namespace gbt
