#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgrag/kg_store.hpp"

namespace kgrag {

enum class RetrievalForm { fact, path, subgraph };
std::string_view to_string(RetrievalForm form);
std::optional<RetrievalForm> parse_retrieval_form(std::string_view text);

struct RetrievalBudget {
  int max_hops = 3;
  int max_paths_per_pair = 3;
  int max_facts = 30;
  int max_neighbors_per_node = 5;

  // Throws ConfigError unless every field is positive.
  void validate() const;
  bool operator==(const RetrievalBudget&) const = default;
};

// A connected triple sequence. nodes[i] and nodes[i + 1] are the display
// names of the entities joined by hops[i]; a hop may be traversed against
// its stored direction.
struct Path {
  std::vector<Triple> hops;
  std::vector<std::string> nodes;
  std::pair<EntityId, EntityId> endpoints;

  // True if hops[i] was traversed from its object to its subject.
  bool reversed(std::size_t i) const;
  bool operator==(const Path&) const = default;
};

struct Evidence {
  RetrievalForm form = RetrievalForm::fact;
  std::vector<Triple> facts;           // form == fact
  std::vector<Path> paths;             // form == path or subgraph
  std::vector<Triple> neighbor_facts;  // form == subgraph
  std::vector<EntityId> seed_entities;

  bool empty() const { return facts.empty() && paths.empty() && neighbor_facts.empty(); }
  // Every triple referenced by the evidence, in serialization order.
  std::vector<Triple> all_triples() const;
  bool operator==(const Evidence&) const = default;
};

Evidence retrieve_facts(const KnowledgeGraph& g, std::span<const EntityId> seeds,
                        const RetrievalBudget& budget);
Evidence retrieve_paths(const KnowledgeGraph& g, std::span<const EntityId> seeds,
                        const RetrievalBudget& budget);
Evidence retrieve_subgraph(const KnowledgeGraph& g, std::span<const EntityId> seeds,
                           const RetrievalBudget& budget);
Evidence retrieve(const KnowledgeGraph& g, std::span<const EntityId> seeds, RetrievalForm form,
                  const RetrievalBudget& budget);

// Union of per-clause evidence of one form; first occurrence wins and the
// fact list is re-capped at max_facts.
Evidence merge_evidence(std::span<const Evidence> parts, RetrievalForm form,
                        const RetrievalBudget& budget);

// Canonical JSON with a fixed key order.
nlohmann::ordered_json to_json(const Evidence& e);
nlohmann::ordered_json to_json(const Triple& t);

}  // namespace kgrag
