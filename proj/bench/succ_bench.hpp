#pragma once

#include <cstdint>
#include <string>

namespace gbt::bench {

// Method comparison for the in-node successor operator over random full key
// regions: non-recursive binary search, early-exit linear scan, branchless
// counting loop, and the explicit vector path. All four share one result
// contract; agreement is asserted before timing.
enum class SuccMethod { Binary, Linear, Counting, Vectorized };

SuccMethod succ_method_from_string(const std::string& s);
const char* succ_method_name(SuccMethod m);

struct SuccBenchResult {
  unsigned width_bits;
  SuccMethod method;
  double mops;
};

// Throughput of one method at one lane width (16/32/64).
SuccBenchResult succ_bench(unsigned width_bits, SuccMethod method,
                           std::uint64_t queries, std::uint64_t seed);

// Cross-check all four methods on `cases` random (region, key) pairs at the
// given width; returns true when every result agrees.
bool succ_methods_agree(unsigned width_bits, std::uint64_t cases,
                        std::uint64_t seed);

}  // namespace gbt::bench
