#include "synth.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <unordered_set>

namespace gbt::bench {

SynthKind synth_kind_from_string(const std::string& s) {
  if (s == "uniform") return SynthKind::Uniform;
  if (s == "consecutive") return SynthKind::Consecutive;
  if (s == "clustered") return SynthKind::Clustered;
  throw std::invalid_argument("unknown synthetic kind: " + s);
}

std::vector<Key> generate_synthetic(SynthKind kind, std::size_t n,
                                    std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("synthetic size must be >= 1");
  std::vector<Key> keys;
  keys.reserve(n);
  std::mt19937_64 rng(seed);

  switch (kind) {
    case SynthKind::Consecutive:
      for (std::size_t i = 0; i < n; ++i) keys.push_back(static_cast<Key>(i));
      return keys;

    case SynthKind::Uniform: {
      std::unordered_set<Key> seen;
      seen.reserve(n * 2);
      while (seen.size() < n) {
        const Key k = rng();
        if (k != kMaxKey) seen.insert(k);
      }
      keys.assign(seen.begin(), seen.end());
      std::sort(keys.begin(), keys.end());
      return keys;
    }

    case SynthKind::Clustered: {
      // Runs of ten thousand consecutive keys, each run offset by a jump
      // around 2^40 so per-leaf differences stay tiny.
      constexpr std::size_t kRun = 10000;
      Key base = rng() % (Key{1} << 32);
      while (keys.size() < n) {
        const std::size_t take = std::min(kRun, n - keys.size());
        for (std::size_t i = 0; i < take; ++i)
          keys.push_back(base + static_cast<Key>(i));
        base += (Key{1} << 40) + (rng() % (Key{1} << 36));
      }
      return keys;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace gbt::bench
