#include "kgrag/linker.hpp"

#include <algorithm>
#include <cmath>

#include "kgrag/errors.hpp"
#include "kgrag/text.hpp"

namespace kgrag {

std::string_view to_string(LinkMethod method) {
  switch (method) {
    case LinkMethod::exact:
      return "exact";
    case LinkMethod::fuzzy:
      return "fuzzy";
    case LinkMethod::none:
      return "none";
  }
  return "none";
}

namespace {

// Banded Levenshtein: returns the exact distance if it is <= limit, else
// any value > limit.
std::size_t bounded_distance(std::u32string_view a, std::u32string_view b, std::size_t limit) {
  if (a.size() < b.size()) std::swap(a, b);
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  if (n - m > limit) return limit + 1;
  const std::size_t big = limit + 1;
  std::vector<std::size_t> prev(m + 1), curr(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j <= limit ? j : big;
  for (std::size_t i = 1; i <= n; ++i) {
    const std::size_t lo = i > limit ? i - limit : 0;
    const std::size_t hi = std::min(m, i + limit);
    std::fill(curr.begin(), curr.end(), big);
    if (lo == 0) curr[0] = i <= limit ? i : big;
    std::size_t row_min = lo == 0 ? curr[0] : big;
    for (std::size_t j = std::max<std::size_t>(lo, 1); j <= hi; ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      const std::size_t del = prev[j] + 1;
      const std::size_t ins = curr[j - 1] + 1;
      curr[j] = std::min({sub, del, ins, big});
      row_min = std::min(row_min, curr[j]);
    }
    if (row_min > limit) return big;
    std::swap(prev, curr);
  }
  return prev[m];
}

}  // namespace

std::size_t edit_distance(std::u32string_view a, std::u32string_view b) {
  return bounded_distance(a, b, std::max(a.size(), b.size()));
}

double normalized_similarity(std::u32string_view a, std::u32string_view b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(edit_distance(a, b)) / static_cast<double>(longest);
}

EntityLinker::EntityLinker(const KnowledgeGraph& graph) : graph_(graph) {
  decoded_.reserve(graph.entity_count());
  for (const std::string& name : graph.canonical_names()) {
    decoded_.push_back(to_code_points(name));
    const std::size_t len = decoded_.back().size();
    if (by_length_.size() <= len) by_length_.resize(len + 1);
    by_length_[len].push_back(static_cast<std::uint32_t>(decoded_.size() - 1));
  }
}

LinkResult EntityLinker::link(std::string_view mention, double threshold) const {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw ConfigError("link threshold must lie in [0, 1]");
  LinkResult result;
  result.mention = std::string(mention);
  const std::string canonical = canonicalize(mention);
  if (canonical.empty()) return result;
  if (auto id = graph_.resolve(canonical)) {
    result.entity = id;
    result.score = 1.0;
    result.method = LinkMethod::exact;
    return result;
  }

  const std::u32string query = to_code_points(canonical);
  const std::size_t qlen = query.size();
  double best_score = -1.0;
  std::optional<std::uint32_t> best;
  // sim = 1 - d / L with L = max(qlen, len) >= d, so a candidate can only
  // reach the threshold if d <= floor((1 - t) * L).
  for (std::size_t len = 0; len < by_length_.size(); ++len) {
    if (by_length_[len].empty()) continue;
    const std::size_t longest = std::max(qlen, len);
    const auto limit =
        static_cast<std::size_t>(std::floor((1.0 - threshold) * static_cast<double>(longest) + 1e-9));
    const std::size_t diff = len > qlen ? len - qlen : qlen - len;
    if (diff > limit) continue;
    for (std::uint32_t index : by_length_[len]) {
      const std::size_t d = bounded_distance(query, decoded_[index], limit);
      if (d > limit) continue;
      const double score = 1.0 - static_cast<double>(d) / static_cast<double>(longest);
      if (score < threshold) continue;
      const bool better =
          score > best_score ||
          (score == best_score && graph_.canonical_names()[index] <
                                      graph_.canonical_names()[*best]);
      if (better) {
        best_score = score;
        best = index;
      }
    }
  }
  if (best) {
    result.entity = EntityId{*best};
    result.score = best_score;
    result.method = LinkMethod::fuzzy;
  }
  return result;
}

std::vector<LinkResult> EntityLinker::link(std::span<const std::string> mentions,
                                           double threshold) const {
  std::vector<LinkResult> out;
  out.reserve(mentions.size());
  for (const std::string& m : mentions) out.push_back(link(m, threshold));
  return out;
}

std::vector<LinkResult> link(const KnowledgeGraph& graph, std::span<const std::string> mentions,
                             double threshold) {
  return EntityLinker(graph).link(mentions, threshold);
}

}  // namespace kgrag
