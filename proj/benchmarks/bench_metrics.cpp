#include <benchmark/benchmark.h>

#include <random>

#include "kgrag/evaluator.hpp"

namespace {

std::string random_text(std::size_t words, std::uint64_t seed) {
  const std::vector<std::string> vocab = {"fever", "cough", "the", "patient", "drug", "treats",
                                          "causes", "pain", "of", "and", "influenza", "aspirin"};
  std::mt19937_64 rng(seed);
  std::string out;
  for (std::size_t i = 0; i < words; ++i) {
    if (i) out += ' ';
    out += vocab[rng() % vocab.size()];
  }
  return out;
}

void BM_Rouge(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::string a = random_text(n, 1), b = random_text(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(kgrag::rouge(a, b, kgrag::Tokenization::space_tokenized));
}
BENCHMARK(BM_Rouge)->Arg(50)->Arg(200)->Arg(1000);

void BM_JudgeMc(benchmark::State& state) {
  const std::string response = random_text(200, 3) + "\nFinal answer: B";
  const kgrag::LetterSet options = {'A', 'B', 'C', 'D'};
  for (auto _ : state) benchmark::DoNotOptimize(kgrag::judge_mc(response, {'B'}, options));
}
BENCHMARK(BM_JudgeMc);

void BM_EmbedSimMock(benchmark::State& state) {
  kgrag::LlmGateway gateway(std::make_unique<kgrag::MockBackend>(kgrag::MockScript{}), {});
  kgrag::EmbeddingCache cache;
  const std::string a = random_text(60, 4), b = random_text(60, 5);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        kgrag::embed_sim(a, b, kgrag::Tokenization::space_tokenized, gateway, &cache));
}
BENCHMARK(BM_EmbedSimMock);

}  // namespace

BENCHMARK_MAIN();
