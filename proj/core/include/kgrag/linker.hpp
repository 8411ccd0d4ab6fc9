#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgrag/kg_store.hpp"

namespace kgrag {

enum class LinkMethod { exact, fuzzy, none };
std::string_view to_string(LinkMethod method);

struct LinkResult {
  std::string mention;
  std::optional<EntityId> entity;
  double score = 0.0;
  LinkMethod method = LinkMethod::none;
};

// Levenshtein distance over code points.
std::size_t edit_distance(std::u32string_view a, std::u32string_view b);

// 1 - edit_distance / max(len); 1.0 for two empty strings.
double normalized_similarity(std::u32string_view a, std::u32string_view b);

inline constexpr double kDefaultLinkThreshold = 0.8;

// Top-1 entity linker over canonical forms. Exact canonical matches win;
// otherwise the most similar entity at or above the threshold, ties going to
// the lexicographically smaller canonical name.
class EntityLinker {
 public:
  explicit EntityLinker(const KnowledgeGraph& graph);

  LinkResult link(std::string_view mention, double threshold = kDefaultLinkThreshold) const;
  std::vector<LinkResult> link(std::span<const std::string> mentions,
                               double threshold = kDefaultLinkThreshold) const;

  const KnowledgeGraph& graph() const { return graph_; }

 private:
  const KnowledgeGraph& graph_;
  // Canonical names decoded once, bucketed by code-point length.
  std::vector<std::u32string> decoded_;
  std::vector<std::vector<std::uint32_t>> by_length_;
};

std::vector<LinkResult> link(const KnowledgeGraph& graph, std::span<const std::string> mentions,
                             double threshold = kDefaultLinkThreshold);

}  // namespace kgrag
