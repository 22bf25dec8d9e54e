#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <vector>

namespace gbt {

// Deferred arena-slot reuse. A retired node's slot may be handed back to a
// free list only once every operation that might still hold a reference to
// it has finished; otherwise a reader could follow a stale child offset into
// a slot that now hosts an unrelated node and validate against the wrong
// lock word. Threads announce the epoch they entered; retired slots carry
// the epoch of their death and are released when the oldest active epoch
// has moved past it.
//
// The thread registry and epoch counter are process-global (one slot per
// thread, registered once); retired lists are per tree.

namespace detail {

class EpochRegistry {
 public:
  static EpochRegistry& instance() {
    static EpochRegistry reg;
    return reg;
  }

  static constexpr std::uint64_t kQuiescent = ~std::uint64_t{0};

  std::atomic<std::uint64_t>* thread_slot() {
    thread_local std::atomic<std::uint64_t>* slot = register_thread();
    return slot;
  }

  std::uint64_t advance() {
    return epoch_.fetch_add(1, std::memory_order_acq_rel);
  }

  std::uint64_t oldest_active() const {
    std::uint64_t oldest = epoch_.load(std::memory_order_acquire);
    std::lock_guard<std::mutex> g(mu_);
    for (const auto& s : slots_) {
      const std::uint64_t e = s->load(std::memory_order_acquire);
      if (e != kQuiescent && e < oldest) oldest = e;
    }
    return oldest;
  }

  std::uint64_t current() const { return epoch_.load(std::memory_order_relaxed); }

 private:
  std::atomic<std::uint64_t>* register_thread() {
    std::lock_guard<std::mutex> g(mu_);
    slots_.push_back(std::make_unique<std::atomic<std::uint64_t>>(kQuiescent));
    return slots_.back().get();
  }

  std::atomic<std::uint64_t> epoch_{1};
  mutable std::mutex mu_;
  std::vector<std::unique_ptr<std::atomic<std::uint64_t>>> slots_;
};

}  // namespace detail

// RAII marker bracketing one tree operation.
class EpochGuard {
 public:
  EpochGuard() : slot_(detail::EpochRegistry::instance().thread_slot()) {
    slot_->store(detail::EpochRegistry::instance().current(),
                 std::memory_order_release);
  }
  ~EpochGuard() {
    slot_->store(detail::EpochRegistry::kQuiescent, std::memory_order_release);
  }
  EpochGuard(const EpochGuard&) = delete;
  EpochGuard& operator=(const EpochGuard&) = delete;

 private:
  std::atomic<std::uint64_t>* slot_;
};

class EpochManager {
 public:
  struct Retired {
    std::uint32_t ref;
    bool leaf;
    std::uint64_t epoch;
  };

  // Called with the node already unreachable. Rare path; a mutex is fine.
  void retire(std::uint32_t ref, bool leaf) {
    const std::uint64_t e = detail::EpochRegistry::instance().advance();
    std::lock_guard<std::mutex> g(mu_);
    retired_.push_back({ref, leaf, e});
  }

  // Move every retiree whose epoch predates all active guards into the
  // output lists. Returns the number released.
  std::size_t collect(std::vector<std::uint32_t>& free_leaves,
                      std::vector<std::uint32_t>& free_inners) {
    std::lock_guard<std::mutex> g(mu_);
    if (retired_.empty()) return 0;
    const std::uint64_t horizon = detail::EpochRegistry::instance().oldest_active();
    std::size_t released = 0;
    for (std::size_t i = 0; i < retired_.size();) {
      if (retired_[i].epoch < horizon) {
        (retired_[i].leaf ? free_leaves : free_inners).push_back(retired_[i].ref);
        retired_[i] = retired_.back();
        retired_.pop_back();
        ++released;
      } else {
        ++i;
      }
    }
    return released;
  }

  std::size_t pending() const {
    std::lock_guard<std::mutex> g(mu_);
    return retired_.size();
  }

 private:
  mutable std::mutex mu_;
  std::vector<Retired> retired_;
};

}  // namespace gbt
