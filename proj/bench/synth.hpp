#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gbt/common.hpp"

namespace gbt::bench {

enum class SynthKind { Uniform, Consecutive, Clustered };

SynthKind synth_kind_from_string(const std::string& s);

// Deterministic synthetic key sets, sorted and unique.
//   uniform     - draws from the whole key domain (compression-hostile)
//   consecutive - the arithmetic run 0..n-1
//   clustered   - dense runs separated by large jumps (compression-friendly)
std::vector<Key> generate_synthetic(SynthKind kind, std::size_t n,
                                    std::uint64_t seed);

}  // namespace gbt::bench
