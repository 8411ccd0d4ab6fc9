#include "kgrag/retriever.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "kgrag/errors.hpp"
#include "kgrag/text.hpp"

namespace kgrag {

std::string_view to_string(RetrievalForm form) {
  switch (form) {
    case RetrievalForm::fact:
      return "fact";
    case RetrievalForm::path:
      return "path";
    case RetrievalForm::subgraph:
      return "subgraph";
  }
  return "fact";
}

std::optional<RetrievalForm> parse_retrieval_form(std::string_view text) {
  if (text == "fact" || text == "facts") return RetrievalForm::fact;
  if (text == "path" || text == "paths") return RetrievalForm::path;
  if (text == "subgraph") return RetrievalForm::subgraph;
  return std::nullopt;
}

void RetrievalBudget::validate() const {
  if (max_hops < 1 || max_paths_per_pair < 1 || max_facts < 1 || max_neighbors_per_node < 1)
    throw ConfigError("retrieval budget fields must all be >= 1");
}

bool Path::reversed(std::size_t i) const {
  return canonicalize(hops.at(i).subject) != canonicalize(nodes.at(i));
}

std::vector<Triple> Evidence::all_triples() const {
  std::vector<Triple> out = facts;
  for (const Path& p : paths) out.insert(out.end(), p.hops.begin(), p.hops.end());
  out.insert(out.end(), neighbor_facts.begin(), neighbor_facts.end());
  return out;
}

namespace {

struct RawPath {
  std::vector<std::size_t> triples;
  std::vector<EntityId> nodes;
};

std::vector<EntityId> unique_seeds(std::span<const EntityId> seeds) {
  std::vector<EntityId> out;
  for (EntityId s : seeds)
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  return out;
}

// Undirected view with hops ordered by (predicate, entity name, triple).
class SortedAdjacency {
 public:
  struct Hop {
    std::size_t triple;
    EntityId next;
  };

  explicit SortedAdjacency(const KnowledgeGraph& g) : g_(g) {}

  const std::vector<Hop>& hops(EntityId id) {
    auto it = cache_.find(id.value);
    if (it != cache_.end()) return it->second;
    std::vector<Hop> hops;
    for (const Edge& e : g_.out_edges(id))
      if (e.other != id) hops.push_back({e.triple, e.other});
    for (const Edge& e : g_.in_edges(id))
      if (e.other != id) hops.push_back({e.triple, e.other});
    std::sort(hops.begin(), hops.end(), [this](const Hop& a, const Hop& b) {
      return std::forward_as_tuple(g_.canonical_predicate(a.triple), g_.canonical_name(a.next),
                                   a.triple) <
             std::forward_as_tuple(g_.canonical_predicate(b.triple), g_.canonical_name(b.next),
                                   b.triple);
    });
    return cache_.emplace(id.value, std::move(hops)).first->second;
  }

 private:
  const KnowledgeGraph& g_;
  std::unordered_map<std::uint32_t, std::vector<Hop>> cache_;
};

class PairSearch {
 public:
  PairSearch(SortedAdjacency& adj, EntityId source, EntityId target, int max_hops,
             std::size_t limit)
      : adj_(adj), source_(source), target_(target), max_hops_(max_hops), limit_(limit) {}

  std::vector<RawPath> run() {
    distances_from_target();
    auto it = dist_.find(source_.value);
    if (it == dist_.end()) return {};
    for (int length = it->second; length <= max_hops_ && found_.size() < limit_; ++length) {
      current_.triples.clear();
      current_.nodes.assign(1, source_);
      on_path_.clear();
      on_path_.insert(source_.value);
      dfs(source_, length);
    }
    return std::move(found_);
  }

 private:
  void distances_from_target() {
    std::deque<EntityId> queue{target_};
    dist_[target_.value] = 0;
    while (!queue.empty()) {
      EntityId v = queue.front();
      queue.pop_front();
      const int d = dist_[v.value];
      if (d == max_hops_) continue;
      for (const auto& hop : adj_.hops(v)) {
        if (dist_.emplace(hop.next.value, d + 1).second) queue.push_back(hop.next);
      }
    }
  }

  void dfs(EntityId v, int length) {
    if (found_.size() >= limit_) return;
    const int depth = static_cast<int>(current_.triples.size());
    if (v == target_) {
      if (depth == length) found_.push_back(current_);
      return;
    }
    for (const auto& hop : adj_.hops(v)) {
      if (on_path_.contains(hop.next.value)) continue;
      auto d = dist_.find(hop.next.value);
      if (d == dist_.end() || depth + 1 + d->second > length) continue;
      on_path_.insert(hop.next.value);
      current_.triples.push_back(hop.triple);
      current_.nodes.push_back(hop.next);
      dfs(hop.next, length);
      current_.nodes.pop_back();
      current_.triples.pop_back();
      on_path_.erase(hop.next.value);
      if (found_.size() >= limit_) return;
    }
  }

  SortedAdjacency& adj_;
  EntityId source_;
  EntityId target_;
  int max_hops_;
  std::size_t limit_;
  std::unordered_map<std::uint32_t, int> dist_;
  std::unordered_set<std::uint32_t> on_path_;
  RawPath current_;
  std::vector<RawPath> found_;
};

std::vector<RawPath> raw_paths(const KnowledgeGraph& g, const std::vector<EntityId>& seeds,
                               const RetrievalBudget& budget) {
  std::vector<RawPath> out;
  SortedAdjacency adj(g);
  if (seeds.size() == 1) {
    const EntityId seed = seeds.front();
    for (const auto& hop : adj.hops(seed)) {
      if (out.size() >= static_cast<std::size_t>(budget.max_facts)) break;
      out.push_back(RawPath{{hop.triple}, {seed, hop.next}});
    }
    return out;
  }
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    for (std::size_t j = i + 1; j < seeds.size(); ++j) {
      PairSearch search(adj, seeds[i], seeds[j], budget.max_hops,
                        static_cast<std::size_t>(budget.max_paths_per_pair));
      for (RawPath& p : search.run()) out.push_back(std::move(p));
    }
  }
  return out;
}

Path to_path(const KnowledgeGraph& g, const RawPath& raw) {
  Path p;
  for (std::size_t t : raw.triples) p.hops.push_back(g.triple(t));
  for (EntityId n : raw.nodes) p.nodes.push_back(g.display_name(n));
  p.endpoints = {raw.nodes.front(), raw.nodes.back()};
  return p;
}

}  // namespace

Evidence retrieve_facts(const KnowledgeGraph& g, std::span<const EntityId> seeds,
                        const RetrievalBudget& budget) {
  budget.validate();
  Evidence e;
  e.form = RetrievalForm::fact;
  e.seed_entities = unique_seeds(seeds);
  std::unordered_set<std::size_t> taken;
  const auto cap = static_cast<std::size_t>(budget.max_facts);
  for (EntityId seed : e.seed_entities) {
    for (std::size_t t : g.incident_triples(seed)) {
      if (e.facts.size() >= cap) return e;
      if (taken.insert(t).second) e.facts.push_back(g.triple(t));
    }
  }
  return e;
}

Evidence retrieve_paths(const KnowledgeGraph& g, std::span<const EntityId> seeds,
                        const RetrievalBudget& budget) {
  budget.validate();
  Evidence e;
  e.form = RetrievalForm::path;
  e.seed_entities = unique_seeds(seeds);
  for (const RawPath& raw : raw_paths(g, e.seed_entities, budget))
    e.paths.push_back(to_path(g, raw));
  return e;
}

Evidence retrieve_subgraph(const KnowledgeGraph& g, std::span<const EntityId> seeds,
                           const RetrievalBudget& budget) {
  budget.validate();
  Evidence e;
  e.form = RetrievalForm::subgraph;
  e.seed_entities = unique_seeds(seeds);
  std::vector<RawPath> raws = raw_paths(g, e.seed_entities, budget);

  std::unordered_set<std::size_t> used;
  std::vector<EntityId> nodes = e.seed_entities;
  for (const RawPath& raw : raws) {
    e.paths.push_back(to_path(g, raw));
    used.insert(raw.triples.begin(), raw.triples.end());
    for (EntityId n : raw.nodes)
      if (std::find(nodes.begin(), nodes.end(), n) == nodes.end()) nodes.push_back(n);
  }
  const auto cap = static_cast<std::size_t>(budget.max_neighbors_per_node);
  for (EntityId n : nodes) {
    std::size_t taken = 0;
    for (std::size_t t : g.incident_triples(n)) {
      if (taken >= cap) break;
      if (!used.insert(t).second) continue;
      e.neighbor_facts.push_back(g.triple(t));
      ++taken;
    }
  }
  return e;
}

Evidence retrieve(const KnowledgeGraph& g, std::span<const EntityId> seeds, RetrievalForm form,
                  const RetrievalBudget& budget) {
  switch (form) {
    case RetrievalForm::fact:
      return retrieve_facts(g, seeds, budget);
    case RetrievalForm::path:
      return retrieve_paths(g, seeds, budget);
    case RetrievalForm::subgraph:
      return retrieve_subgraph(g, seeds, budget);
  }
  return retrieve_facts(g, seeds, budget);
}

Evidence merge_evidence(std::span<const Evidence> parts, RetrievalForm form,
                        const RetrievalBudget& budget) {
  Evidence out;
  out.form = form;
  std::set<Triple> on_paths;
  for (const Evidence& part : parts) {
    for (EntityId s : part.seed_entities)
      if (std::find(out.seed_entities.begin(), out.seed_entities.end(), s) ==
          out.seed_entities.end())
        out.seed_entities.push_back(s);
    for (const Path& p : part.paths) {
      if (std::find(out.paths.begin(), out.paths.end(), p) != out.paths.end()) continue;
      out.paths.push_back(p);
      on_paths.insert(p.hops.begin(), p.hops.end());
    }
  }
  std::set<Triple> seen;
  for (const Evidence& part : parts) {
    for (const Triple& t : part.facts) {
      if (out.facts.size() >= static_cast<std::size_t>(budget.max_facts)) break;
      if (seen.insert(t).second) out.facts.push_back(t);
    }
  }
  seen.clear();
  for (const Evidence& part : parts) {
    for (const Triple& t : part.neighbor_facts) {
      if (on_paths.contains(t)) continue;
      if (seen.insert(t).second) out.neighbor_facts.push_back(t);
    }
  }
  return out;
}

nlohmann::ordered_json to_json(const Triple& t) {
  return nlohmann::ordered_json::array({t.subject, t.predicate, t.object});
}

nlohmann::ordered_json to_json(const Evidence& e) {
  using json = nlohmann::ordered_json;
  json j;
  j["form"] = std::string(to_string(e.form));
  json seeds = json::array();
  for (EntityId s : e.seed_entities) seeds.push_back(s.value);
  j["seed_entities"] = std::move(seeds);
  auto triples = [](const std::vector<Triple>& ts) {
    json arr = json::array();
    for (const Triple& t : ts) arr.push_back(to_json(t));
    return arr;
  };
  if (e.form == RetrievalForm::fact) {
    j["facts"] = triples(e.facts);
  } else {
    json paths = json::array();
    for (const Path& p : e.paths) {
      json jp;
      jp["nodes"] = p.nodes;
      jp["hops"] = triples(p.hops);
      paths.push_back(std::move(jp));
    }
    j["paths"] = std::move(paths);
    if (e.form == RetrievalForm::subgraph) j["neighbor_facts"] = triples(e.neighbor_facts);
  }
  return j;
}

}  // namespace kgrag
