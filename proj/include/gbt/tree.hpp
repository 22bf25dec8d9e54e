#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "gbt/arena.hpp"
#include "gbt/common.hpp"
#include "gbt/epoch.hpp"
#include "gbt/nodes.hpp"
#include "gbt/optimistic_lock.hpp"

namespace gbt {

enum class ModeChoice : std::uint8_t { Auto, Plain, Compressed };

struct BuildConfig {
  double alpha_leaf = 0.75;     // leaf fill factor in [0.5, 1.0]
  double alpha_growth = 0.125;  // per-level fill increase toward 1.0
  ModeChoice mode = ModeChoice::Auto;
  // Arena slot reservations; 0 picks a default sized from the input.
  std::size_t leaf_arena_slots = 0;
  std::size_t inner_arena_slots = 0;
};

// Input partitioning verdict: segments of 13 keys, average leading zeros of
// the per-segment span; >= 32 favors frame-of-reference leaves.
TreeMode decide_mode(std::span<const Key> sorted_keys);
double decide_mode_avg_leading_zeros(std::span<const Key> sorted_keys);

// Narrowest lane width whose target occupancy fits the difference budget,
// taken greedily from the head of a sorted run.
LeafWidth pick_leaf_width(const Key* run, std::size_t n, double alpha);

// Ordered index over unsigned 64-bit keys with gapped nodes: unused slots
// duplicate the next used key so counting search stays branchless, updates
// shift at most to the nearest gap, and bulk loading spreads keys with
// proactive gaps. Leaves optionally store frame-of-reference differences in
// 16/32/64-bit lanes inside the same 1024-bit region. Safe for any number of
// concurrent readers and writers via optimistic lock coupling.
class Tree {
 public:
  struct LookupResult {
    bool found;
    NodeRef leaf;
    std::uint32_t slot;
  };

  struct RangePos {
    NodeRef leaf;
    std::uint32_t slot;
  };

  struct RangeResult {
    RangePos begin;
    RangePos end;  // exclusive
    std::uint64_t count;
  };

  struct Stats {
    TreeMode mode;
    unsigned height;
    std::uint64_t key_count;
    std::uint64_t leaf_count;       // live leaves
    std::uint64_t inner_count;      // live inner nodes
    std::uint64_t leaves_w16;
    std::uint64_t leaves_w32;
    std::uint64_t leaves_w64;
    std::size_t arena_bytes;        // key regions + child arrays handed out
    std::size_t aux_bytes;          // parallel aux arrays handed out
    std::size_t bytes() const { return arena_bytes + aux_bytes; }
  };

  struct ValidationReport {
    bool ok = true;
    std::string error;
  };

  explicit Tree(BuildConfig cfg = {});
  static Tree build(std::span<const Key> sorted_keys, BuildConfig cfg = {});
  ~Tree() = default;
  Tree(const Tree&) = delete;
  Tree& operator=(const Tree&) = delete;

  bool insert(Key k);
  bool erase(Key k);
  LookupResult lookup(Key k) const;
  bool contains(Key k) const { return lookup(k).found; }

  RangeResult range(Key lo, Key hi) const;              // picks a strategy
  RangeResult range_chain(Key lo, Key hi) const;        // leaf-chain walk
  RangeResult range_two_descent(Key lo, Key hi) const;  // descend for both ends
  std::size_t range_collect(Key lo, Key hi, std::vector<Key>& out) const;

  TreeMode mode() const { return mode_; }
  std::uint64_t size() const { return key_count_.load(std::memory_order_relaxed); }
  unsigned height() const { return height_.load(std::memory_order_relaxed); }
  // Contention restarts (version-validation failures). Zero single-threaded.
  std::uint64_t restarts() const { return restarts_.load(std::memory_order_relaxed); }
  // Full-path restarts taken because a separator could not be absorbed.
  std::uint64_t split_restarts() const {
    return split_restarts_.load(std::memory_order_relaxed);
  }

  Stats stats() const;
  ValidationReport validate() const;  // quiescent tree only

  // Ascending scan of every live key; quiescent tree only.
  void scan_all(std::vector<Key>& out) const;

 private:
  friend struct TreeTestHook;

  using LeafArena = Arena<LeafBlock, LeafAux>;
  using InnerArena = Arena<InnerNode, InnerAux>;

  struct PathEntry {
    NodeRef ref;
    std::uint64_t version;
    unsigned child_idx;
  };
  // Root-to-parent trail of the latest descent (height is small and bounded).
  using Path = std::array<PathEntry, 24>;

  struct Descent {
    NodeRef leaf;
    std::uint64_t leaf_version;
    NodeRef parent;              // kNullRef when the root is the leaf
    std::uint64_t parent_version;
    unsigned parent_idx;
    std::uint64_t anchor_version;
    unsigned depth;              // path entries filled (inner levels)
  };

  // --- arena accessors -----------------------------------------------
  InnerNode& inner(NodeRef r) { return inner_->node(r); }
  const InnerNode& inner(NodeRef r) const { return inner_->node(r); }
  InnerAux& inner_aux(NodeRef r) { return inner_->aux(r); }
  const InnerAux& inner_aux(NodeRef r) const { return inner_->aux(r); }
  LeafBlock& leaf(NodeRef r) { return leaf_->node(r); }
  const LeafBlock& leaf(NodeRef r) const { return leaf_->node(r); }
  LeafAux& leaf_aux(NodeRef r) { return leaf_->aux(r); }
  const LeafAux& leaf_aux(NodeRef r) const { return leaf_->aux(r); }

  NodeRef alloc_leaf();
  NodeRef alloc_inner();
  void retire_node(NodeRef ref, bool is_leaf);
  void drain_retired();

  // --- leaf lane operations (width dispatched) ------------------------
  unsigned leaf_succ_ge(NodeRef ref, Key k) const;
  unsigned leaf_succ_gt(NodeRef ref, Key k) const;
  bool leaf_find(NodeRef ref, Key k, unsigned& slot) const;
  bool leaf_insert_fits(NodeRef ref, Key k) const;   // in range and not full
  bool leaf_insert(NodeRef ref, Key k);              // pre: fits, may dup
  bool leaf_erase(NodeRef ref, Key k);
  unsigned leaf_capacity_of(NodeRef ref) const;
  bool leaf_boundary_at(NodeRef ref, unsigned slot) const;  // non-sentinel slot
  void leaf_keys(NodeRef ref, std::vector<Key>& out) const;  // live keys
  std::uint64_t leaf_window_count(NodeRef ref, unsigned from, unsigned to) const;
  void leaf_window_collect(NodeRef ref, unsigned from, unsigned to,
                           std::vector<Key>& out) const;
  Key leaf_first_key(NodeRef ref) const;

  // Lay out a sorted absolute-key run into a leaf, choosing base and width
  // for the tree mode. Returns keys consumed.
  std::size_t fill_leaf(NodeRef ref, const Key* keys, std::size_t n, double alpha);
  // Split layout: one gap after every key.
  void lay_leaf_interleaved(NodeRef ref, const Key* keys, unsigned count);

  // --- inner helpers ---------------------------------------------------
  void inner_insert_sep(NodeRef ref, Key sep, NodeRef right_child);
  void inner_remove_child(NodeRef ref, unsigned child_idx);
  bool inner_full(NodeRef ref) const {
    return inner_aux(ref).slotuse >= kInnerSepCap;
  }

  // --- write-path helpers ----------------------------------------------
  enum class OpStatus { Done, Retry, SplitPass };

  bool descend(Key k, Descent& d, Path& path) const;
  OpStatus insert_attempt(Key k, bool& result);
  OpStatus insert_structural(Key k, const Descent& d, bool& result);
  OpStatus proactive_pass(Key k, bool& result);
  void split_inner_locked(NodeRef node, NodeRef parent);  // both write-held
  void split_root_inner(NodeRef oldroot);                 // anchor+root held
  OpStatus erase_attempt(Key k, bool& result);
  void handle_empty_leaf(Key k, const Descent& d);  // consumes both locks
  bool unlink_leaf(Key k, NodeRef dead, const Descent& d);

  Tree(std::span<const Key> sorted_keys, const BuildConfig& cfg);
  void bulk_build_impl(std::span<const Key> keys);

  void note_key_bounds(Key k);
  void bump_restarts() const { restarts_.fetch_add(1, std::memory_order_relaxed); }

  // --- data -------------------------------------------------------------
  std::unique_ptr<InnerArena> inner_;
  std::unique_ptr<LeafArena> leaf_;
  VersionLock anchor_;  // guards root/height transitions
  std::atomic<NodeRef> root_{kNullRef};
  std::atomic<unsigned> height_{1};
  std::atomic<std::uint64_t> key_count_{0};
  std::atomic<std::uint64_t> live_leaves_{0};
  std::atomic<std::uint64_t> live_inners_{0};
  std::atomic<Key> min_seen_{kMaxKey};
  std::atomic<Key> max_seen_{0};
  mutable std::atomic<std::uint64_t> restarts_{0};
  std::atomic<std::uint64_t> split_restarts_{0};
  TreeMode mode_ = TreeMode::Plain;
  BuildConfig cfg_;
  mutable EpochManager epochs_;
  std::mutex structure_mu_;  // serializes rare leaf-unlink restructures

  friend class TreeBuilder;
};

inline void check_client_key(Key k) {
  if (k == kMaxKey)
    throw std::invalid_argument("key 2^64-1 is reserved");
}

}  // namespace gbt
