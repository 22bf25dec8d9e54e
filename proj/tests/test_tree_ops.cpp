#include <cstring>
#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "gbt/bitmask.hpp"
#include "reference_model.hpp"
#include "test_hook.hpp"

using namespace gbt;
using gbt::bench::ReferenceModel;

namespace {
std::vector<Key> random_unique(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::set<Key> s;
  while (s.size() < n) {
    const Key k = rng();
    if (k != kMaxKey) s.insert(k);
  }
  return {s.begin(), s.end()};
}
}  // namespace

TEST_CASE("worked equality search example") {
  // Tree shaped like the worked search example: separators 50/124/199,
  // second leaf holding 13 at slot 1.
  std::vector<Key> keys = {11, 13, 17, 18, 50, 60, 70, 80, 124, 130, 140,
                           150, 199, 210, 220, 230, 240, 250, 260, 270};
  std::sort(keys.begin(), keys.end());
  Tree t = Tree::build(keys);
  for (const Key k : keys) REQUIRE(t.contains(k));
  const auto r = t.lookup(13);
  CHECK(r.found);
  CHECK(!t.contains(14));
  CHECK(!t.contains(12));
}

TEST_CASE("empty tree answers not-found") {
  Tree t;
  CHECK(!t.contains(0));
  CHECK(!t.contains(123456));
  CHECK(!t.lookup(kMaxKey - 1).found);
}

TEST_CASE("reserved key is rejected across the API") {
  Tree t;
  CHECK_THROWS_AS((void)t.insert(kMaxKey), std::invalid_argument);
  CHECK_THROWS_AS((void)t.erase(kMaxKey), std::invalid_argument);
  CHECK_THROWS_AS((void)t.lookup(kMaxKey), std::invalid_argument);
  CHECK_THROWS_AS((void)t.range(1, kMaxKey), std::invalid_argument);
  CHECK_THROWS_AS((void)t.range(5, 4), std::invalid_argument);
}

TEST_CASE("lookup matches a sorted-set oracle for present and absent keys") {
  const auto keys = random_unique(10000, 31);
  Tree t = Tree::build(keys);
  ReferenceModel m;
  for (const Key k : keys) m.insert(k);
  std::mt19937_64 rng(32);
  for (int i = 0; i < 10000; ++i) {
    REQUIRE(t.contains(keys[rng() % keys.size()]));
    const Key absent = rng();
    if (absent == kMaxKey) continue;
    REQUIRE(t.contains(absent) == m.contains(absent));
  }
}

TEST_CASE("range over the worked example bounds") {
  std::vector<Key> keys = {11, 13, 17, 18, 50, 60, 70, 80};
  Tree t = Tree::build(keys);
  const auto r = t.range_chain(13, 17);
  CHECK(r.count == 2);
  std::vector<Key> got;
  t.range_collect(13, 17, got);
  CHECK(got == std::vector<Key>{13, 17});

  // Degenerate range equals lookup.
  const auto one = t.range_chain(50, 50);
  CHECK(one.count == 1);
  const auto none = t.range_chain(14, 16);
  CHECK(none.count == 0);
}

TEST_CASE("range strategies agree with each other and the oracle") {
  const auto keys = random_unique(30000, 77);
  Tree t = Tree::build(keys);
  ReferenceModel m;
  for (const Key k : keys) m.insert(k);

  std::mt19937_64 rng(78);
  for (int i = 0; i < 1000; ++i) {
    Key lo = rng();
    if (lo >= kMaxKey - 2) lo = kMaxKey - 3;
    const Key span = rng() % (kMaxKey / 4);
    const Key hi = lo + std::min(span, kMaxKey - 2 - lo);
    const auto a = t.range_chain(lo, hi);
    const auto b = t.range_two_descent(lo, hi);
    const auto c = t.range(lo, hi);
    const std::uint64_t want = m.range_count(lo, hi);
    REQUIRE(a.count == want);
    REQUIRE(b.count == want);
    REQUIRE(c.count == want);

    std::vector<Key> got, expect;
    t.range_collect(lo, hi, got);
    m.range_keys(lo, hi, expect);
    REQUIRE(got == expect);
  }
}

TEST_CASE("insert into a gap places without moving other slots") {
  std::vector<Key> keys;
  for (Key i = 0; i < 12; ++i) keys.push_back(100 + 10 * i);
  Tree t = Tree::build(keys, {.mode = ModeChoice::Plain});
  const NodeRef leaf = TreeTestHook::root(t);
  const LeafBlock before = TreeTestHook::leaf_block(t, leaf);

  // 125 lands in the pattern gap at slot 3 (which duplicates 130).
  REQUIRE(before.w64[3] == 130);
  REQUIRE(t.insert(125));
  const LeafBlock& after = TreeTestHook::leaf_block(t, leaf);
  unsigned changed = 0;
  for (unsigned i = 0; i < 16; ++i)
    if (before.w64[i] != after.w64[i]) ++changed;
  CHECK(changed == 1);
  CHECK(after.w64[3] == 125);
  CHECK(t.validate().ok);
}

TEST_CASE("insert shifting to the nearest gap mirrors the worked update") {
  // Leaf where 53's slot is occupied and the next slot is a gap: the new
  // key 52 takes 53's slot and 53 right-shifts into the gap.
  std::vector<Key> keys = {11, 18, 25, 32, 46, 53, 60, 67, 74, 81, 88, 95};
  Tree t = Tree::build(keys, {.mode = ModeChoice::Plain});
  // Pattern slots {0,1,2,4,5,6,8,...}: 53 sits at slot 6, slot 7 is a gap.
  const NodeRef leaf = TreeTestHook::root(t);
  REQUIRE(TreeTestHook::leaf_block(t, leaf).w64[6] == 53);
  REQUIRE(!slot_used(static_cast<std::uint16_t>(TreeTestHook::leaf_aux(t, leaf).bitmap), 7));
  REQUIRE(t.insert(52));
  const LeafBlock& after = TreeTestHook::leaf_block(t, leaf);
  CHECK(after.w64[6] == 52);
  CHECK(after.w64[7] == 53);  // right-shifted into the gap
  CHECK(t.contains(52));
  CHECK(t.contains(53));
  CHECK(t.validate().ok);
}

TEST_CASE("duplicate inserts are rejected and leave the tree unchanged") {
  const auto keys = random_unique(1000, 5);
  Tree t = Tree::build(keys);
  for (int i = 0; i < 100; ++i) {
    REQUIRE(!t.insert(keys[i * 7 % keys.size()]));
  }
  CHECK(t.size() == keys.size());
  CHECK(t.validate().ok);
}

TEST_CASE("random inserts match the oracle") {
  std::mt19937_64 rng(123);
  Tree t;
  ReferenceModel m;
  for (int i = 0; i < 100000; ++i) {
    Key k = rng() % 200000;  // force duplicate attempts
    REQUIRE(t.insert(k) == m.insert(k));
    if (i % 10000 == 9999) REQUIRE(t.validate().ok);
  }
  CHECK(t.size() == m.size());
  std::vector<Key> scanned;
  t.scan_all(scanned);
  std::vector<Key> expect;
  m.range_keys(0, kMaxKey - 1, expect);
  REQUIRE(scanned == expect);
}

TEST_CASE("deleting a duplicated-gap value overwrites the whole run") {
  std::vector<Key> keys;
  for (Key i = 0; i < 12; ++i) keys.push_back(100 + 10 * i);
  Tree t = Tree::build(keys, {.mode = ModeChoice::Plain});
  // Delete a key that sits right after a pattern gap so the gap duplicates
  // it: slot 3 is a gap holding keys[3]=130's value; slot 4 holds 130.
  const NodeRef leaf = TreeTestHook::root(t);
  REQUIRE(TreeTestHook::leaf_block(t, leaf).w64[3] == 130);
  REQUIRE(TreeTestHook::leaf_block(t, leaf).w64[4] == 130);
  REQUIRE(t.erase(130));
  const LeafBlock& after = TreeTestHook::leaf_block(t, leaf);
  CHECK(after.w64[3] == 140);  // both slots take the next valid key
  CHECK(after.w64[4] == 140);
  CHECK(!t.contains(130));
  CHECK(t.validate().ok);
}

TEST_CASE("deleting the only key empties the tree") {
  Tree t;
  REQUIRE(t.insert(77));
  REQUIRE(t.erase(77));
  CHECK(t.size() == 0);
  CHECK(!t.contains(77));
  CHECK(t.validate().ok);
  REQUIRE(t.insert(78));  // revives
  CHECK(t.contains(78));
}

TEST_CASE("interleaved random inserts and deletes match the oracle") {
  std::mt19937_64 rng(4242);
  Tree t;
  ReferenceModel m;
  std::vector<Key> pool;
  for (int i = 0; i < 100000; ++i) {
    const bool ins = pool.empty() || rng() % 3 != 0;
    if (ins) {
      const Key k = rng() % 500000;
      REQUIRE(t.insert(k) == m.insert(k));
      pool.push_back(k);
    } else {
      const Key k = pool[rng() % pool.size()];
      REQUIRE(t.erase(k) == m.erase(k));
    }
    if (i % 1000 == 999) REQUIRE(t.validate().ok);
  }
  CHECK(t.size() == m.size());
  std::vector<Key> scanned, expect;
  t.scan_all(scanned);
  m.range_keys(0, kMaxKey - 1, expect);
  REQUIRE(scanned == expect);
}

TEST_CASE("split distributes sixteen keys as two interleaved halves") {
  std::vector<Key> keys;
  for (Key i = 0; i < 16; ++i) keys.push_back(1000 + 10 * i);
  Tree t = Tree::build(keys, {.alpha_leaf = 1.0, .mode = ModeChoice::Plain});
  REQUIRE(t.height() == 1);
  REQUIRE(TreeTestHook::leaf_aux(t, TreeTestHook::root(t)).slotuse == 16);

  REQUIRE(t.insert(1005));  // forces the split
  CHECK(t.height() == 2);
  const auto leaves = TreeTestHook::leaves_in_order(t);
  REQUIRE(leaves.size() == 2);
  // 16 existing keys split 8/8 at even slots, then 1005 retried into the left.
  const LeafAux& la = TreeTestHook::leaf_aux(t, leaves[0]);
  const LeafAux& ra = TreeTestHook::leaf_aux(t, leaves[1]);
  CHECK(la.slotuse == 9);
  CHECK(ra.slotuse == 8);
  for (unsigned i = 0; i < 8; ++i)
    CHECK(slot_used(static_cast<std::uint16_t>(ra.bitmap), 2 * i));
  for (const Key k : keys) REQUIRE(t.contains(k));
  REQUIRE(t.contains(1005));
  CHECK(t.validate().ok);
}

TEST_CASE("randomized fill-to-split keeps every key reachable") {
  std::mt19937_64 rng(888);
  for (int round = 0; round < 50; ++round) {
    Tree t;
    std::set<Key> inserted;
    while (TreeTestHook::height(t) < 3) {
      Key k = rng() % 1000000;
      if (k == kMaxKey) continue;
      t.insert(k);
      inserted.insert(k);
    }
    for (const Key k : inserted) REQUIRE(t.contains(k));
    REQUIRE(t.validate().ok);
  }
}

TEST_CASE("non-splitting insert touches exactly one leaf") {
  const auto keys = random_unique(10000, 456);
  Tree t = Tree::build(keys);
  const auto leaves = TreeTestHook::leaves_in_order(t);
  std::vector<LeafBlock> before(leaves.size());
  for (std::size_t i = 0; i < leaves.size(); ++i)
    before[i] = TreeTestHook::leaf_block(t, leaves[i]);

  const Key k = 0x123456789ULL;
  REQUIRE(t.insert(k));
  REQUIRE(t.stats().leaf_count == leaves.size());  // no split occurred
  unsigned touched = 0;
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    const LeafBlock& now = TreeTestHook::leaf_block(t, leaves[i]);
    if (std::memcmp(&before[i], &now, sizeof(LeafBlock)) != 0) ++touched;
  }
  CHECK(touched == 1);
}

TEST_CASE("a split touches the split leaf, its new sibling and the parent only") {
  const auto keys = random_unique(10000, 457);
  Tree t = Tree::build(keys);
  auto leaves = TreeTestHook::leaves_in_order(t);
  // Fill one mid-tree leaf to capacity with targeted inserts.
  const NodeRef victim = leaves[leaves.size() / 2];
  const auto in_leaf = TreeTestHook::leaf_keys(t, victim);
  REQUIRE(in_leaf.size() >= 2);
  std::mt19937_64 rng(458);
  const Key lo = in_leaf.front(), hi = in_leaf.back();
  while (TreeTestHook::leaf_aux(t, victim).slotuse < 16) {
    const Key k = lo + rng() % (hi - lo);
    t.insert(k);
  }
  leaves = TreeTestHook::leaves_in_order(t);
  std::vector<LeafBlock> before(leaves.size());
  for (std::size_t i = 0; i < leaves.size(); ++i)
    before[i] = TreeTestHook::leaf_block(t, leaves[i]);

  // One more key into the full leaf forces the split.
  Key k = lo + rng() % (hi - lo);
  while (!t.insert(k)) k = lo + rng() % (hi - lo);
  REQUIRE(t.stats().leaf_count == leaves.size() + 1);
  unsigned touched = 0;
  for (std::size_t i = 0; i < leaves.size(); ++i)
    if (std::memcmp(&before[i], &TreeTestHook::leaf_block(t, leaves[i]),
                    sizeof(LeafBlock)) != 0)
      ++touched;
  CHECK(touched == 1);  // the split leaf; its sibling is a fresh node
  CHECK(t.validate().ok);
}

TEST_CASE("deletes that empty leaves keep the tree searchable") {
  // Drain an entire region of the tree, then check routing and revival.
  std::vector<Key> keys;
  for (Key i = 0; i < 2000; ++i) keys.push_back(i * 3);
  Tree t = Tree::build(keys);
  for (Key i = 0; i < 1000; ++i) REQUIRE(t.erase(i * 3));
  CHECK(t.size() == 1000);
  REQUIRE(t.validate().ok);
  for (Key i = 0; i < 1000; ++i) CHECK(!t.contains(i * 3));
  for (Key i = 1000; i < 2000; ++i) REQUIRE(t.contains(i * 3));
  // Range over the drained region is empty; over the seam it is exact.
  CHECK(t.range_chain(0, 2996).count == 0);
  CHECK(t.range_chain(0, 3000).count == 1);
  // Reinsert into the drained range.
  for (Key i = 0; i < 500; ++i) REQUIRE(t.insert(i * 3));
  REQUIRE(t.validate().ok);
  CHECK(t.size() == 1500);
}

TEST_CASE("descending drain exercises leaf retirement and reuse") {
  std::vector<Key> keys;
  for (Key i = 0; i < 4000; ++i) keys.push_back(i * 5);
  Tree t = Tree::build(keys);
  for (auto it = keys.rbegin(); it != keys.rend(); ++it) REQUIRE(t.erase(*it));
  CHECK(t.size() == 0);
  REQUIRE(t.validate().ok);
  TreeTestHook::drain_retired(t);
  CHECK(TreeTestHook::leaf_free_count(t) > 0);  // retired slots were recycled
  const auto allocated_before = TreeTestHook::leaf_slots_allocated(t);
  for (const Key k : keys) REQUIRE(t.insert(k));
  REQUIRE(t.validate().ok);
  // Reinsertion reused free-listed slots rather than only bumping.
  CHECK(TreeTestHook::leaf_slots_allocated(t) <
        allocated_before + keys.size() / 12);
}
