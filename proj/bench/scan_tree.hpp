#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gbt/bitmask.hpp"
#include "gbt/common.hpp"

namespace gbt::bench {

// Comparison variant for the insert-cost experiment: the same node geometry
// and proactive gaps, but gaps are tracked by the bitmap alone (unused
// slots hold stale values), so in-node search linearly scans used slots
// instead of running the branchless counting search. Single-threaded,
// insert/lookup only.
class ScanTree {
 public:
  ScanTree() {
    leaves_.push_back({});
    root_ = 0;
    height_ = 1;
  }

  void bulk_build(std::span<const Key> sorted, double alpha = 0.75);
  bool insert(Key k);
  bool lookup(Key k) const;
  std::uint64_t size() const { return count_; }
  std::vector<Key> scan_all() const;

 private:
  static constexpr unsigned kCap = 16;
  static constexpr unsigned kSepCap = 15;
  static constexpr std::uint32_t kNil = 0xFFFFFFFFu;

  struct Leaf {
    Key keys[kCap];
    std::uint16_t bitmap = 0;
    std::uint16_t slotuse = 0;
    std::uint32_t next = kNil;
  };
  struct Inner {
    Key keys[kCap];
    std::uint32_t children[kCap];
    std::uint16_t bitmap = 0;
    std::uint16_t slotuse = 0;
  };

  struct Split {
    Key sep;
    std::uint32_t right;
  };

  unsigned route(const Inner& n, Key k) const;
  unsigned leaf_lower(const Leaf& l, Key k) const;
  bool leaf_place(Leaf& l, Key k);
  void sep_place(Inner& n, unsigned r, Key sep, std::uint32_t right);
  std::optional<Split> insert_rec(std::uint32_t node, unsigned level, Key k,
                                  bool& inserted);

  std::vector<Leaf> leaves_;
  std::vector<Inner> inners_;
  std::uint32_t root_ = 0;
  unsigned height_ = 1;
  std::uint64_t count_ = 0;
};

}  // namespace gbt::bench
