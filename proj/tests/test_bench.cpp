#include <cstdio>
#include <filesystem>
#include <numeric>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "keyfile.hpp"
#include "reference_model.hpp"
#include "scan_tree.hpp"
#include "succ_bench.hpp"
#include "synth.hpp"
#include "workload.hpp"

using namespace gbt;
using namespace gbt::bench;

namespace {
struct TempFile {
  std::string path;
  explicit TempFile(const char* name)
      : path((std::filesystem::temp_directory_path() / name).string()) {}
  ~TempFile() { std::remove(path.c_str()); }
};
}  // namespace

TEST_CASE("key file round trip") {
  TempFile f("gbt_keys_roundtrip.bin");
  std::vector<Key> keys = {0, 5, 9, 1ull << 40, kMaxKey - 1};
  write_keyfile(f.path, keys);
  CHECK(read_keyfile(f.path) == keys);
}

TEST_CASE("key file loader rejects malformed input") {
  TempFile f("gbt_keys_bad.bin");
  {
    std::vector<Key> keys = {1, 2, 3};
    write_keyfile(f.path, keys);
    // Truncate one byte: length no longer matches the count header.
    std::filesystem::resize_file(f.path, 8 * 4 - 1);
    CHECK_THROWS_WITH_AS((void)read_keyfile(f.path),
                         doctest::Contains("byte length"), std::runtime_error);
  }
  {
    std::vector<Key> keys = {1, kMaxKey, 3};
    // write_keyfile happily writes; the loader must reject with the index.
    write_keyfile(f.path, keys);
    CHECK_THROWS_WITH_AS((void)read_keyfile(f.path), doctest::Contains("index 1"),
                         std::runtime_error);
  }
}

TEST_CASE("synthetic generators are deterministic and shaped as named") {
  const auto c = generate_synthetic(SynthKind::Consecutive, 100, 999);
  std::vector<Key> expect(100);
  std::iota(expect.begin(), expect.end(), Key{0});
  CHECK(c == expect);

  const auto u1 = generate_synthetic(SynthKind::Uniform, 100000, 7);
  const auto u2 = generate_synthetic(SynthKind::Uniform, 100000, 7);
  CHECK(u1 == u2);
  CHECK(decide_mode(u1) == TreeMode::Plain);

  const auto cl = generate_synthetic(SynthKind::Clustered, 100000, 7);
  CHECK(decide_mode(cl) == TreeMode::Compressed);
  CHECK(std::is_sorted(cl.begin(), cl.end()));
}

TEST_CASE("workload presets map to the published mixes") {
  const auto a = workload_preset('A');
  CHECK(a.read == 1.0);
  const auto b = workload_preset('B');
  CHECK(b.write == 1.0);
  const auto c = workload_preset('C');
  CHECK(c.read == 0.5);
  CHECK(c.write == 0.5);
  const auto d = workload_preset('D');
  CHECK(d.range == 0.95);
  CHECK(d.write == 0.05);
  const auto e = workload_preset('E');
  CHECK(e.read == 0.6);
  CHECK(e.write == 0.35);
  CHECK(e.del == 0.05);
  CHECK_THROWS((void)workload_preset('Z'));
}

TEST_CASE("verified workload runs pass the shadow oracle") {
  for (const char preset : {'A', 'B', 'C', 'D', 'E'}) {
    WorkloadSpec spec = workload_preset(preset);
    spec.build_count = 20000;
    spec.op_count = 20000;
    spec.seed = 42;
    auto data = generate_synthetic(SynthKind::Uniform, 60000, 5);
    const auto rep = run_workload(spec, std::move(data), ModeChoice::Auto, true,
                                  Engine::Gapped, "uniform", std::string(1, preset));
    CHECK(rep.verified);
    CHECK(rep.verify_ok);
    if (preset == 'A') {
      CHECK(rep.ops.reads == rep.ops.total());
      CHECK(rep.ops.read_hits == rep.ops.reads);  // reads sample built keys
    }
  }
}

TEST_CASE("pure insert workload starts from an empty tree") {
  WorkloadSpec spec = workload_preset('B');
  spec.build_count = 0;
  spec.op_count = 30000;
  spec.seed = 3;
  auto data = generate_synthetic(SynthKind::Uniform, 40000, 6);
  const auto rep = run_workload(spec, std::move(data), ModeChoice::Auto, true);
  CHECK(rep.verify_ok);
  CHECK(rep.ops.write_acks == rep.ops.writes);  // disjoint pool: all land
  CHECK(rep.tree_stats.key_count == rep.ops.write_acks);
}

TEST_CASE("reports are machine readable and stable modulo timing") {
  WorkloadSpec spec = workload_preset('C');
  spec.build_count = 10000;
  spec.op_count = 10000;
  spec.seed = 77;
  auto run = [&] {
    auto data = generate_synthetic(SynthKind::Clustered, 40000, 8);
    return run_workload(spec, std::move(data), ModeChoice::Auto, false,
                        Engine::Gapped, "clustered", "C");
  };
  auto j1 = nlohmann::json::parse(run().to_json());
  auto j2 = nlohmann::json::parse(run().to_json());
  for (auto* j : {&j1, &j2}) {
    j->erase("build_seconds");
    j->erase("decision_seconds");
    j->erase("op_seconds");
    j->erase("throughput_mops");
  }
  CHECK(j1 == j2);
  CHECK(j1["mode"] == "compressed");
  CHECK(j1["published_reference"]["build_seconds_150M_keys"] == doctest::Approx(0.33));
}

TEST_CASE("dataset underflow is reported") {
  WorkloadSpec spec = workload_preset('B');
  spec.build_count = 1000;
  spec.op_count = 10000;
  auto data = generate_synthetic(SynthKind::Uniform, 2000, 5);
  CHECK_THROWS_WITH_AS(
      (void)run_workload(spec, std::move(data), ModeChoice::Auto, false),
      doctest::Contains("dataset underflow"), std::runtime_error);
}

TEST_CASE("successor methods agree at every width") {
  CHECK(succ_methods_agree(64, 200000, 1));
  CHECK(succ_methods_agree(32, 200000, 2));
  CHECK(succ_methods_agree(16, 200000, 3));
}

TEST_CASE("scan-baseline tree behaves like the model") {
  std::mt19937_64 rng(15);
  ScanTree t;
  ReferenceModel m;
  std::vector<Key> init;
  {
    std::set<Key> s;
    while (s.size() < 5000) s.insert(rng() % 1000000);
    init.assign(s.begin(), s.end());
  }
  t.bulk_build(init);
  for (const Key k : init) m.insert(k);
  for (const Key k : init) REQUIRE(t.lookup(k));
  for (int i = 0; i < 50000; ++i) {
    const Key k = rng() % 1000000;
    if (rng() % 2) {
      REQUIRE(t.insert(k) == m.insert(k));
    } else {
      REQUIRE(t.lookup(k) == m.contains(k));
    }
  }
  std::vector<Key> expect;
  m.range_keys(0, kMaxKey - 1, expect);
  REQUIRE(t.scan_all() == expect);
  CHECK(t.size() == m.size());
}
