#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "keyfile.hpp"
#include "succ_bench.hpp"
#include "synth.hpp"
#include "workload.hpp"

using namespace gbt;
using namespace gbt::bench;

namespace {

int cmd_bench(const std::string& workload, std::uint64_t build, std::uint64_t ops,
              unsigned threads, std::uint64_t seed, const std::string& dataset_file,
              const std::string& synthetic, const std::string& mode_str, bool verify,
              const std::string& report_file, const std::string& engine_str,
              double mix_read, double mix_write, double mix_range, double mix_del,
              double selectivity) {
  WorkloadSpec spec;
  std::string wname = workload;
  if (workload.size() == 1 && workload[0] >= 'A' && workload[0] <= 'E') {
    spec = workload_preset(workload[0]);
  } else if (workload == "custom") {
    spec.read = mix_read;
    spec.write = mix_write;
    spec.range = mix_range;
    spec.del = mix_del;
  } else {
    std::cerr << "workload must be A..E or custom\n";
    return 2;
  }
  spec.build_count = build;
  spec.op_count = ops;
  spec.threads = threads;
  spec.seed = seed;
  spec.range_selectivity = selectivity;

  ModeChoice mode = ModeChoice::Auto;
  if (mode_str == "plain") mode = ModeChoice::Plain;
  else if (mode_str == "compressed") mode = ModeChoice::Compressed;
  else if (mode_str != "auto") {
    std::cerr << "mode must be auto|plain|compressed\n";
    return 2;
  }

  const Engine engine =
      engine_str == "scan-baseline" ? Engine::ScanBaseline : Engine::Gapped;

  std::vector<Key> data;
  std::string dname;
  if (!dataset_file.empty()) {
    data = read_keyfile(dataset_file);
    dname = dataset_file;
  } else {
    const SynthKind kind = synth_kind_from_string(synthetic);
    // Generate enough for the build sample plus the write pool.
    const std::uint64_t need =
        build + static_cast<std::uint64_t>(static_cast<double>(ops) * spec.write) +
        threads + 1024;
    data = generate_synthetic(kind, need, seed);
    dname = "synthetic:" + synthetic;
  }

  const RunReport rep =
      run_workload(spec, std::move(data), mode, verify, engine, dname, wname);
  const std::string json = rep.to_json();
  std::cout << json << "\n";
  if (!report_file.empty()) {
    std::ofstream out(report_file);
    out << json << "\n";
  }
  if (rep.verified && !rep.verify_ok) {
    std::cerr << "verification FAILED: " << rep.verify_detail << "\n";
    return 1;
  }
  return 0;
}

int cmd_succbench(unsigned width, const std::string& method_str, std::uint64_t queries,
                  std::uint64_t seed) {
  if (!succ_methods_agree(width, 1000000, seed)) {
    std::cerr << "method agreement check FAILED at width " << width << "\n";
    return 1;
  }
  auto run = [&](SuccMethod m) {
    const auto r = succ_bench(width, m, queries, seed);
    std::printf("{\"width\":%u,\"method\":\"%s\",\"mops\":%.2f}\n", r.width_bits,
                succ_method_name(r.method), r.mops);
    return r.mops;
  };
  if (method_str == "all") {
    const double binary = run(SuccMethod::Binary);
    run(SuccMethod::Linear);
    run(SuccMethod::Counting);
    const double simd = run(SuccMethod::Vectorized);
    std::printf("{\"vectorized_vs_binary\":%.2f,\"paper_reference\":7.0}\n",
                binary > 0 ? simd / binary : 0.0);
  } else {
    run(succ_method_from_string(method_str));
  }
  return 0;
}

int cmd_gen(const std::string& kind_str, std::uint64_t n, std::uint64_t seed,
            const std::string& out) {
  const auto keys = generate_synthetic(synth_kind_from_string(kind_str), n, seed);
  write_keyfile(out, keys);
  std::printf("{\"kind\":\"%s\",\"n\":%llu,\"seed\":%llu,\"out\":\"%s\"}\n",
              kind_str.c_str(), static_cast<unsigned long long>(keys.size()),
              static_cast<unsigned long long>(seed), out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gapped data-parallel B+-tree benchmark harness"};
  app.require_subcommand(1);

  // bench
  auto* bench = app.add_subcommand("bench", "run a workload against the tree");
  std::string workload = "A";
  std::uint64_t build = 1000000, ops = 1000000, seed = 1;
  unsigned threads = 1;
  std::string dataset_file, synthetic = "uniform", mode = "auto", report;
  std::string engine = "gapped";
  bool verify = false;
  double mix_read = 0, mix_write = 0, mix_range = 0, mix_del = 0, selectivity = 153;
  bench->add_option("--workload", workload, "A|B|C|D|E|custom");
  bench->add_option("--build", build, "keys bulk-loaded before the run");
  bench->add_option("--ops", ops, "operations executed");
  bench->add_option("--threads", threads, "worker count");
  bench->add_option("--seed", seed, "64-bit seed");
  bench->add_option("--dataset", dataset_file, "binary key file");
  bench->add_option("--synthetic", synthetic, "uniform|consecutive|clustered");
  bench->add_option("--mode", mode, "auto|plain|compressed");
  bench->add_flag("--verify", verify, "run the shadow oracle / accounting checks");
  bench->add_option("--report", report, "also write the JSON record here");
  bench->add_option("--engine", engine, "gapped|scan-baseline (test flag)");
  bench->add_option("--mix-read", mix_read, "custom read fraction");
  bench->add_option("--mix-write", mix_write, "custom write fraction");
  bench->add_option("--mix-range", mix_range, "custom range fraction");
  bench->add_option("--mix-delete", mix_del, "custom delete fraction");
  bench->add_option("--range-selectivity", selectivity, "target keys per range");

  // succbench
  auto* sb = app.add_subcommand("succbench", "in-node successor method comparison");
  unsigned width = 64;
  std::string method = "all";
  std::uint64_t queries = 50000000, sseed = 1;
  sb->add_option("--width", width, "16|32|64");
  sb->add_option("--method", method, "binary|linear|counting|vectorized|all");
  sb->add_option("--queries", queries, "queries per method");
  sb->add_option("--seed", sseed, "seed");

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic key file");
  std::string kind = "uniform", out = "keys.bin";
  std::uint64_t n = 1000000, gseed = 1;
  gen->add_option("--kind", kind, "uniform|consecutive|clustered");
  gen->add_option("--n", n, "key count");
  gen->add_option("--seed", gseed, "seed");
  gen->add_option("--out", out, "output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (bench->parsed())
      return cmd_bench(workload, build, ops, threads, seed, dataset_file, synthetic,
                       mode, verify, report, engine, mix_read, mix_write, mix_range,
                       mix_del, selectivity);
    if (sb->parsed()) return cmd_succbench(width, method, queries, sseed);
    if (gen->parsed()) return cmd_gen(kind, n, gseed, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
