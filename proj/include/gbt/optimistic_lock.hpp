#pragma once

#include <atomic>
#include <cstdint>
#include <thread>

namespace gbt {

// Per-node version word: bit 0 = obsolete, bit 1 = locked, higher bits count
// write unlocks. Readers validate that the word they saw before consuming a
// node is still current afterwards; writers CAS the lock bit in and bump the
// counter on the way out. The counter only ever grows, also across arena
// slot reuse, so a stale reader can never validate against a recycled node.
class VersionLock {
 public:
  static constexpr std::uint64_t kObsolete = 1;
  static constexpr std::uint64_t kLocked = 2;

  static bool is_locked(std::uint64_t v) { return (v & kLocked) != 0; }
  static bool is_obsolete(std::uint64_t v) { return (v & kObsolete) != 0; }

  // Spin until the lock bit clears, then return the version. The caller
  // checks the obsolete bit and restarts its operation if set.
  std::uint64_t read_lock() const {
    std::uint64_t v = word_.load(std::memory_order_acquire);
    while (is_locked(v)) {
      std::this_thread::yield();
      v = word_.load(std::memory_order_acquire);
    }
    return v;
  }

  bool validate(std::uint64_t v) const {
    return word_.load(std::memory_order_acquire) == v;
  }

  // Bounded-spin read for paths that must not wait on other writers.
  bool try_read_lock(std::uint64_t& v, unsigned spins = 64) const {
    for (unsigned i = 0; i < spins; ++i) {
      v = word_.load(std::memory_order_acquire);
      if (!is_locked(v)) return true;
    }
    return false;
  }

  // Upgrade an optimistic read to exclusive; fails if anything changed.
  bool try_upgrade(std::uint64_t v) {
    return word_.compare_exchange_strong(v, v + kLocked, std::memory_order_acquire);
  }

  void write_unlock() { word_.fetch_add(kLocked, std::memory_order_release); }

  // Unlock without a version bump when nothing was modified.
  void write_unlock_unchanged() {
    word_.fetch_sub(kLocked, std::memory_order_release);
  }

  void write_unlock_obsolete() {
    word_.fetch_add(kLocked | kObsolete, std::memory_order_release);
  }

  // Reclaim an obsolete word for a fresh node: counter advances, lock held.
  void relock_for_reuse() {
    const std::uint64_t v = word_.load(std::memory_order_relaxed);
    word_.store(((v >> 2) + 1) << 2 | kLocked, std::memory_order_release);
  }

  std::uint64_t raw() const { return word_.load(std::memory_order_relaxed); }

 private:
  std::atomic<std::uint64_t> word_{0};
};

static_assert(sizeof(VersionLock) == 8);

// Restart pacing: spin for the first few attempts, then back off
// exponentially so contending operations cannot livelock.
inline void restart_backoff(unsigned attempt) {
  if (attempt < 16) {
    std::this_thread::yield();
    return;
  }
  const unsigned shift = attempt - 16 < 10 ? attempt - 16 : 10;
  std::this_thread::sleep_for(std::chrono::microseconds(1u << shift));
}

}  // namespace gbt
