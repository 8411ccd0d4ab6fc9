#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "kgrag/retriever.hpp"

namespace {

void BM_RetrievePaths(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto g = bench::random_graph(n, n * 4);
  const std::vector<kgrag::EntityId> seeds = {{0}, {1}, {2}};
  kgrag::RetrievalBudget b;
  for (auto _ : state) benchmark::DoNotOptimize(kgrag::retrieve_paths(g, seeds, b));
}
BENCHMARK(BM_RetrievePaths)->Arg(100)->Arg(1000)->Arg(10000);

void BM_RetrieveSubgraph(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto g = bench::random_graph(n, n * 4);
  const std::vector<kgrag::EntityId> seeds = {{0}, {1}, {2}};
  kgrag::RetrievalBudget b;
  for (auto _ : state) benchmark::DoNotOptimize(kgrag::retrieve_subgraph(g, seeds, b));
}
BENCHMARK(BM_RetrieveSubgraph)->Arg(100)->Arg(1000)->Arg(10000);

void BM_RetrieveFacts(benchmark::State& state) {
  const auto g = bench::random_graph(10000, 40000);
  const std::vector<kgrag::EntityId> seeds = {{0}, {1}, {2}};
  kgrag::RetrievalBudget b;
  for (auto _ : state) benchmark::DoNotOptimize(kgrag::retrieve_facts(g, seeds, b));
}
BENCHMARK(BM_RetrieveFacts);

}  // namespace

BENCHMARK_MAIN();
