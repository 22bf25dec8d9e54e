#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <vector>

#include "gbt/common.hpp"

namespace gbt {

namespace detail {
// Anonymous mapping with a large virtual reservation; pages commit on first
// touch so the tracked footprint is the allocated-slot count, not the
// reservation. Requests transparent huge pages, silently degrading when the
// platform refuses.
void* map_reservation(std::size_t bytes);
void unmap_reservation(void* p, std::size_t bytes);
}  // namespace detail

// Contiguous fixed-slot storage for one node level, addressed by 32-bit
// offsets. Node payload and aux entries are parallel arrays sharing offsets.
template <class Node, class Aux>
class Arena {
 public:
  explicit Arena(std::size_t capacity) : capacity_(capacity) {
    nodes_ = static_cast<Node*>(detail::map_reservation(capacity * sizeof(Node)));
    aux_ = static_cast<Aux*>(detail::map_reservation(capacity * sizeof(Aux)));
  }

  ~Arena() {
    detail::unmap_reservation(nodes_, capacity_ * sizeof(Node));
    detail::unmap_reservation(aux_, capacity_ * sizeof(Aux));
  }

  Arena(const Arena&) = delete;
  Arena& operator=(const Arena&) = delete;

  // Fresh slot from the bump cursor. Free-listed slots are recycled through
  // take_free() by callers that know how to re-initialize the lock word.
  NodeRef allocate() {
    const std::uint64_t idx = bump_.fetch_add(1, std::memory_order_relaxed);
    if (idx >= capacity_) throw arena_full("node arena exhausted");
    return static_cast<NodeRef>(idx);
  }

  bool take_free(NodeRef& out) {
    std::lock_guard<std::mutex> g(free_mu_);
    if (free_.empty()) return false;
    out = free_.back();
    free_.pop_back();
    return true;
  }

  void push_free(NodeRef ref) {
    std::lock_guard<std::mutex> g(free_mu_);
    free_.push_back(ref);
  }

  Node& node(NodeRef ref) { return nodes_[ref]; }
  const Node& node(NodeRef ref) const { return nodes_[ref]; }
  Aux& aux(NodeRef ref) { return aux_[ref]; }
  const Aux& aux(NodeRef ref) const { return aux_[ref]; }

  std::size_t allocated() const { return bump_.load(std::memory_order_relaxed); }
  std::size_t free_count() const {
    std::lock_guard<std::mutex> g(free_mu_);
    return free_.size();
  }
  std::size_t capacity() const { return capacity_; }

  // Tracked footprint: slots handed out so far, node plus aux bytes.
  std::size_t tracked_bytes() const {
    return allocated() * (sizeof(Node) + sizeof(Aux));
  }

 private:
  Node* nodes_ = nullptr;
  Aux* aux_ = nullptr;
  std::size_t capacity_;
  std::atomic<std::uint64_t> bump_{0};
  mutable std::mutex free_mu_;
  std::vector<NodeRef> free_;
};

}  // namespace gbt
