#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace kgrag {

struct Triple {
  std::string subject;
  std::string predicate;
  std::string object;

  auto operator<=>(const Triple&) const = default;
};

// Returns the reason a candidate triple is invalid, or nullopt if it is fine.
// Fields are checked after whitespace trimming.
std::optional<std::string> triple_violation(std::string_view subject,
                                            std::string_view predicate,
                                            std::string_view object);

// Trims and validates; throws InvalidTriple.
Triple make_triple(std::string_view subject, std::string_view predicate,
                   std::string_view object);

using CanonicalTriple = std::tuple<std::string, std::string, std::string>;
CanonicalTriple canonical_triple(const Triple& t);

// Dense handle into one KnowledgeGraph's entity table.
struct EntityId {
  std::uint32_t value = 0;

  auto operator<=>(const EntityId&) const = default;
};

// One adjacency entry: the triple index and the entity on the other end.
struct Edge {
  std::size_t triple = 0;
  EntityId other;
};

struct Neighbor {
  std::string predicate;
  EntityId entity;

  auto operator<=>(const Neighbor&) const = default;
};

enum class Direction { out, in, both };

struct LoadOptions {
  // Strict aborts on the first malformed line; lenient skips and counts.
  bool strict = true;
};

struct LoadStats {
  std::size_t lines = 0;
  std::size_t blank = 0;
  std::size_t malformed = 0;
  std::size_t duplicates = 0;
  std::vector<std::size_t> malformed_lines;
};

// Immutable triple store with forward and reverse adjacency. Safe to share
// across threads once constructed.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  // Deduplicates on the canonical triple; first surface form wins.
  static KnowledgeGraph from_triples(std::span<const Triple> triples,
                                     std::size_t* duplicates = nullptr);
  static KnowledgeGraph parse_tsv(std::string_view text,
                                  const LoadOptions& options = {},
                                  LoadStats* stats = nullptr);
  static KnowledgeGraph load_tsv(const std::filesystem::path& path,
                                 const LoadOptions& options = {},
                                 LoadStats* stats = nullptr);

  std::size_t triple_count() const { return triples_.size(); }
  std::size_t entity_count() const { return canonical_names_.size(); }

  const std::vector<Triple>& triples() const { return triples_; }
  const Triple& triple(std::size_t index) const { return triples_.at(index); }
  EntityId subject_of(std::size_t triple) const { return ends_.at(triple).first; }
  EntityId object_of(std::size_t triple) const { return ends_.at(triple).second; }
  const std::string& canonical_predicate(std::size_t triple) const {
    return canonical_predicates_.at(triple);
  }

  const std::string& canonical_name(EntityId id) const;
  // Surface form of the first occurrence in the input.
  const std::string& display_name(EntityId id) const;
  const std::vector<std::string>& canonical_names() const { return canonical_names_; }

  std::span<const Edge> out_edges(EntityId id) const;
  std::span<const Edge> in_edges(EntityId id) const;

  // Throws UnknownEntity for ids outside [0, entity_count).
  std::vector<Neighbor> neighbors(EntityId id, Direction direction) const;

  // Triple indices touching `id` in either direction, ascending (file order).
  std::vector<std::size_t> incident_triples(EntityId id) const;

  std::optional<EntityId> resolve(std::string_view name) const;

  bool contains(const Triple& t) const;
  std::optional<std::size_t> find(const Triple& t) const;

  std::string to_tsv() const;
  void write_tsv(const std::filesystem::path& path) const;

 private:
  void check(EntityId id) const;
  EntityId intern(const std::string& surface);

  std::vector<Triple> triples_;
  std::vector<std::string> canonical_predicates_;
  std::vector<std::pair<EntityId, EntityId>> ends_;
  std::vector<std::string> canonical_names_;
  std::vector<std::string> display_names_;
  std::unordered_map<std::string, EntityId> entity_index_;
  std::map<CanonicalTriple, std::size_t> triple_lookup_;
  std::vector<std::vector<Edge>> forward_adj_;
  std::vector<std::vector<Edge>> reverse_adj_;
};

}  // namespace kgrag
