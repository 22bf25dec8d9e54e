#include "scan_tree.hpp"

#include <algorithm>
#include <cassert>
#include <cstring>

namespace gbt::bench {

unsigned ScanTree::route(const Inner& n, Key k) const {
  unsigned idx = 0;
  for (unsigned s = next_used(n.bitmap, 0); s < kCap; s = next_used(n.bitmap, s + 1)) {
    if (n.keys[s] <= k)
      idx = s + 1;
    else
      break;
  }
  return idx;
}

unsigned ScanTree::leaf_lower(const Leaf& l, Key k) const {
  for (unsigned s = next_used(l.bitmap, 0); s < kCap; s = next_used(l.bitmap, s + 1))
    if (l.keys[s] >= k) return s;
  return kCap;
}

// Shift-to-nearest-gap placement, bitmap-only (no value duplication).
bool ScanTree::leaf_place(Leaf& l, Key k) {
  const unsigned r = leaf_lower(l, k);
  if (r < kCap && l.keys[r] == k) return false;  // duplicate
  // A free slot between the previous used slot and r takes k directly.
  const int below = prev_free(l.bitmap, r < kCap ? r : kCap);
  const int prev_used_slot = prev_used(l.bitmap, r < kCap ? r : kCap);
  if (below >= 0 && below > prev_used_slot) {
    l.keys[below] = k;
    mark_used(l.bitmap, static_cast<unsigned>(below));
    ++l.slotuse;
    return true;
  }
  if (r < kCap) {
    const unsigned j = next_free(l.bitmap, r);
    if (j < kCap) {
      std::memmove(l.keys + r + 1, l.keys + r, (j - r) * sizeof(Key));
      // Occupancy moves with the run: slots r..j become used.
      for (unsigned s = r; s <= j; ++s) mark_used(l.bitmap, s);
      l.keys[r] = k;
      ++l.slotuse;
      return true;
    }
  }
  const unsigned rr = r < kCap ? r : kCap;
  const int j = prev_free(l.bitmap, rr);
  assert(j >= 0);
  std::memmove(l.keys + j, l.keys + j + 1, (rr - 1 - j) * sizeof(Key));
  for (unsigned s = static_cast<unsigned>(j); s < rr; ++s) mark_used(l.bitmap, s);
  l.keys[rr - 1] = k;
  ++l.slotuse;
  return true;
}

void ScanTree::sep_place(Inner& n, unsigned r, Key sep, std::uint32_t right) {
  const std::uint16_t pseudo = static_cast<std::uint16_t>(n.bitmap | 0x0001u);
  const int below = prev_free(pseudo, r < kSepCap ? r : kSepCap);
  const int prev_used_slot = prev_used(n.bitmap, r < kSepCap ? r : kSepCap);
  if (r < kSepCap && !slot_used(pseudo, r)) {
    n.keys[r] = sep;
    n.children[r + 1] = right;
    mark_used(n.bitmap, r);
    ++n.slotuse;
    return;
  }
  if (below >= 0 && below > prev_used_slot) {
    n.keys[below] = sep;
    n.children[below + 1] = right;
    mark_used(n.bitmap, static_cast<unsigned>(below));
    ++n.slotuse;
    return;
  }
  if (r < kSepCap) {
    const unsigned j = next_free(pseudo, r);
    if (j < kCap) {
      std::memmove(n.keys + r + 1, n.keys + r, (j - r) * sizeof(Key));
      std::memmove(n.children + r + 2, n.children + r + 1, (j - r) * sizeof(std::uint32_t));
      for (unsigned s = r; s <= j; ++s) mark_used(n.bitmap, s);
      n.keys[r] = sep;
      n.children[r + 1] = right;
      ++n.slotuse;
      return;
    }
  }
  const unsigned rr = r < kSepCap ? r : kSepCap;
  const int j = prev_free(pseudo, rr);
  assert(j >= 0);
  const unsigned ju = static_cast<unsigned>(j);
  std::memmove(n.keys + ju, n.keys + ju + 1, (rr - 1 - ju) * sizeof(Key));
  std::memmove(n.children + ju + 1, n.children + ju + 2, (rr - 1 - ju) * sizeof(std::uint32_t));
  for (unsigned s = ju; s < rr; ++s) mark_used(n.bitmap, s);
  n.keys[rr - 1] = sep;
  n.children[rr] = right;
  ++n.slotuse;
}

std::optional<ScanTree::Split> ScanTree::insert_rec(std::uint32_t node, unsigned level,
                                                    Key k, bool& inserted) {
  if (level == 1) {
    Leaf& l = leaves_[node];
    if (l.slotuse < kCap) {
      inserted = leaf_place(l, k);
      return std::nullopt;
    }
    {
      const unsigned r = leaf_lower(l, k);
      if (r < kCap && l.keys[r] == k) {
        inserted = false;
        return std::nullopt;
      }
    }
    // Full: interleave the halves across old and new leaf, then place k.
    Key packed[kCap];
    for (unsigned s = 0; s < kCap; ++s) packed[s] = l.keys[s];
    const std::uint32_t right_ref = static_cast<std::uint32_t>(leaves_.size());
    leaves_.push_back({});
    Leaf& right = leaves_.back();
    Leaf& left = leaves_[node];  // re-fetch: push_back may reallocate

    auto lay = [](Leaf& dst, const Key* src, unsigned cnt) {
      dst.bitmap = 0;
      dst.slotuse = static_cast<std::uint16_t>(cnt);
      for (unsigned i = 0; i < cnt; ++i) {
        dst.keys[2 * i] = src[i];
        mark_used(dst.bitmap, 2 * i);
      }
    };
    right.next = left.next;
    left.next = right_ref;
    lay(right, packed + 8, 8);
    Key lhalf[8];
    std::copy(packed, packed + 8, lhalf);
    lay(left, lhalf, 8);
    const Key sep = right.keys[0];
    inserted = leaf_place(k < sep ? left : right, k);
    return Split{sep, right_ref};
  }

  Inner& n = inners_[node];
  const unsigned idx = route(n, k);
  const std::uint32_t child = n.children[idx];
  auto split = insert_rec(child, level - 1, k, inserted);
  if (!split) return std::nullopt;

  Inner& nn = inners_[node];  // re-fetch: recursion may grow the vector
  if (nn.slotuse < kSepCap) {
    const unsigned r = [&] {
      unsigned lo = 0;
      for (unsigned s = next_used(nn.bitmap, 0); s < kCap; s = next_used(nn.bitmap, s + 1)) {
        if (nn.keys[s] >= split->sep) return s;
        lo = s + 1;
      }
      return lo;
    }();
    sep_place(nn, r, split->sep, split->right);
    return std::nullopt;
  }

  // Full inner: median up, halves interleaved at even slots.
  Key seps[kSepCap];
  std::uint32_t kids[kCap];
  unsigned ns = 0;
  kids[0] = nn.children[0];
  for (unsigned s = next_used(nn.bitmap, 0); s < kCap; s = next_used(nn.bitmap, s + 1)) {
    seps[ns] = nn.keys[s];
    kids[ns + 1] = nn.children[s + 1];
    ++ns;
  }
  const std::uint32_t right_ref = static_cast<std::uint32_t>(inners_.size());
  inners_.push_back({});
  Inner& right = inners_.back();
  Inner& left = inners_[node];

  auto lay = [](Inner& dst, const Key* sp, unsigned cnt, const std::uint32_t* ch) {
    dst.bitmap = 0;
    dst.slotuse = static_cast<std::uint16_t>(cnt);
    dst.children[0] = ch[0];
    for (unsigned i = 0; i < cnt; ++i) {
      dst.keys[2 * i] = sp[i];
      mark_used(dst.bitmap, 2 * i);
      dst.children[2 * i + 1] = ch[i + 1];
    }
  };
  const unsigned half = ns / 2;
  const Key median = seps[half];
  lay(right, seps + half + 1, ns - half - 1, kids + half + 1);
  lay(left, seps, half, kids);
  Inner& target = split->sep < median ? left : right;
  const unsigned r = [&] {
    unsigned lo = 0;
    for (unsigned s = next_used(target.bitmap, 0); s < kCap; s = next_used(target.bitmap, s + 1)) {
      if (target.keys[s] >= split->sep) return s;
      lo = s + 1;
    }
    return lo;
  }();
  sep_place(target, r, split->sep, split->right);
  return Split{median, right_ref};
}

bool ScanTree::insert(Key k) {
  bool inserted = false;
  auto split = insert_rec(root_, height_, k, inserted);
  if (split) {
    const std::uint32_t nr = static_cast<std::uint32_t>(inners_.size());
    inners_.push_back({});
    Inner& n = inners_.back();
    n.keys[0] = split->sep;
    mark_used(n.bitmap, 0);
    n.slotuse = 1;
    n.children[0] = root_;
    n.children[1] = split->right;
    root_ = nr;
    ++height_;
  }
  if (inserted) ++count_;
  return inserted;
}

bool ScanTree::lookup(Key k) const {
  std::uint32_t node = root_;
  unsigned level = height_;
  while (level > 1) {
    const Inner& n = inners_[node];
    node = n.children[route(n, k)];
    --level;
  }
  const Leaf& l = leaves_[node];
  const unsigned r = leaf_lower(l, k);
  return r < kCap && l.keys[r] == k;
}

void ScanTree::bulk_build(std::span<const Key> sorted, double alpha) {
  leaves_.clear();
  inners_.clear();
  count_ = sorted.size();
  const unsigned g = alpha < 1.0
                         ? std::max(1u, static_cast<unsigned>(1.0 / (1.0 - alpha)) - 1)
                         : 0;
  std::vector<Key> leads;
  std::size_t pos = 0;
  const std::size_t n = sorted.size();
  do {
    Leaf l{};
    for (unsigned slot = 0; slot < kCap && pos < n; ++slot) {
      const bool gap = g > 0 && slot % (g + 1) == g;
      if (gap) continue;
      l.keys[slot] = sorted[pos++];
      mark_used(l.bitmap, slot);
      ++l.slotuse;
    }
    if (!leaves_.empty()) leaves_.back().next = static_cast<std::uint32_t>(leaves_.size());
    leads.push_back(l.slotuse ? l.keys[next_used(l.bitmap, 0)] : 0);
    leaves_.push_back(l);
  } while (pos < n);

  std::vector<std::uint32_t> refs(leaves_.size());
  for (std::size_t i = 0; i < refs.size(); ++i) refs[i] = static_cast<std::uint32_t>(i);
  height_ = 1;
  while (refs.size() > 1) {
    std::vector<std::uint32_t> up;
    std::vector<Key> up_leads;
    std::size_t p = 0;
    while (p < refs.size()) {
      Inner n{};
      n.children[0] = refs[p];
      std::size_t m = refs.size() - p - 1;
      unsigned placed = 0;
      unsigned slot = 0;
      while (placed < kSepCap - 1 && m > 0 && slot < kSepCap) {
        n.keys[slot] = leads[p + 1 + placed];
        n.children[slot + 1] = refs[p + 1 + placed];
        mark_used(n.bitmap, slot);
        ++n.slotuse;
        ++placed;
        --m;
        ++slot;
      }
      if (m == 1 && placed > 1) {  // avoid stranding a lone child
        --placed;
        --n.slotuse;
        mark_free(n.bitmap, slot - 1);
        n.children[slot] = 0;
        ++m;
      }
      up.push_back(static_cast<std::uint32_t>(inners_.size()));
      up_leads.push_back(leads[p]);
      inners_.push_back(n);
      p += placed + 1;
    }
    refs.swap(up);
    leads.swap(up_leads);
    ++height_;
  }
  root_ = refs[0];
}

std::vector<Key> ScanTree::scan_all() const {
  std::vector<Key> out;
  std::uint32_t node = root_;
  unsigned level = height_;
  while (level > 1) {
    node = inners_[node].children[0];
    --level;
  }
  while (node != kNil) {
    const Leaf& l = leaves_[node];
    for (unsigned s = next_used(l.bitmap, 0); s < kCap; s = next_used(l.bitmap, s + 1))
      out.push_back(l.keys[s]);
    node = l.next;
  }
  return out;
}

}  // namespace gbt::bench
