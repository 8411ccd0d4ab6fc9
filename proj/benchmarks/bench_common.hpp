#pragma once

#include <random>
#include <string>
#include <vector>

#include "kgrag/kg_store.hpp"

namespace bench {

// Random graph with `entities` nodes "n<i>" and `triples` edges.
inline kgrag::KnowledgeGraph random_graph(int entities, int triples, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  const std::vector<std::string> predicates = {"causes", "treats", "is_a", "part_of", "has"};
  std::vector<kgrag::Triple> out;
  for (int i = 0; i < triples; ++i) {
    const auto s = rng() % static_cast<std::uint64_t>(entities);
    auto o = rng() % static_cast<std::uint64_t>(entities);
    if (o == s) o = (o + 1) % static_cast<std::uint64_t>(entities);
    out.push_back({"n" + std::to_string(s), predicates[rng() % predicates.size()],
                   "n" + std::to_string(o)});
  }
  return kgrag::KnowledgeGraph::from_triples(out);
}

}  // namespace bench
