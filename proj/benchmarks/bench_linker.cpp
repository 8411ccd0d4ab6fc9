#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "kgrag/linker.hpp"

namespace {

void BM_LinkExact(benchmark::State& state) {
  const auto g = bench::random_graph(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)) * 2);
  kgrag::EntityLinker linker(g);
  for (auto _ : state) benchmark::DoNotOptimize(linker.link("n7"));
}
BENCHMARK(BM_LinkExact)->Arg(1000)->Arg(10000);

void BM_LinkFuzzy(benchmark::State& state) {
  const auto g = bench::random_graph(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)) * 2);
  kgrag::EntityLinker linker(g);
  for (auto _ : state) benchmark::DoNotOptimize(linker.link("n7x"));
}
BENCHMARK(BM_LinkFuzzy)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
