#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gbt/tree.hpp"

namespace gbt::bench {

// Declarative operation mix. Named presets:
//   A = 100% read, B = 100% write, C = 50/50 read-write,
//   D = 95% range + 5% write, E = 60% read + 35% write + 5% delete.
struct WorkloadSpec {
  double read = 0.0;
  double write = 0.0;
  double range = 0.0;
  double del = 0.0;
  std::uint64_t build_count = 0;
  std::uint64_t op_count = 0;
  unsigned threads = 1;
  std::uint64_t seed = 1;
  double range_selectivity = 153.0;  // target keys per range result
};

WorkloadSpec workload_preset(char name);

enum class Engine { Gapped, ScanBaseline };

struct OpCounters {
  std::uint64_t reads = 0, read_hits = 0;
  std::uint64_t writes = 0, write_acks = 0;
  std::uint64_t ranges = 0, range_keys = 0;
  std::uint64_t deletes = 0, delete_acks = 0;
  std::uint64_t total() const { return reads + writes + ranges + deletes; }
};

struct RunReport {
  std::string workload;
  std::string dataset;
  Engine engine = Engine::Gapped;
  unsigned threads = 1;
  std::uint64_t seed = 0;
  std::uint64_t build_count = 0;
  std::uint64_t op_count = 0;
  TreeMode mode = TreeMode::Plain;
  double decision_seconds = 0.0;
  double build_seconds = 0.0;
  double op_seconds = 0.0;
  double throughput_mops = 0.0;
  OpCounters ops;
  Tree::Stats tree_stats{};
  bool verified = false;        // a verification pass ran
  bool verify_ok = true;
  std::string verify_detail;
  std::string to_json() const;  // one machine-readable record
};

// Run a workload over a dataset of unique keys. The first build_count keys
// of a seeded shuffle are bulk-loaded; write keys come from the disjoint
// remainder; read/delete/range anchors sample the built set.
RunReport run_workload(const WorkloadSpec& spec, std::vector<Key> dataset,
                       ModeChoice mode, bool verify,
                       Engine engine = Engine::Gapped,
                       std::string dataset_name = "synthetic",
                       std::string workload_name = "custom");

}  // namespace gbt::bench
