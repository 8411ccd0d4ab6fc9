#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgrag/linker.hpp"
#include "kgrag/llm_gateway.hpp"
#include "kgrag/templates.hpp"
#include "kgrag/text.hpp"

namespace kgrag {

enum class EnhancementStrategy { none, understand, expand, decompose };
std::string_view to_string(EnhancementStrategy s);
std::optional<EnhancementStrategy> parse_enhancement(std::string_view text);

struct EnhancedQuery {
  std::string original;
  EnhancementStrategy strategy = EnhancementStrategy::none;
  // Deduplicated by canonical form; first occurrence wins.
  std::vector<std::string> seeds;
  // Decompose only: one seed list per clause.
  std::vector<std::string> sub_queries;
  std::vector<std::vector<std::string>> clause_seeds;
  // Raw LLM outputs, in call order.
  std::vector<std::string> trace;
  std::vector<std::string> template_ids;
  // True when the strategy yielded no linkable seed and the plain n-gram
  // scan of the question was used instead.
  bool fallback = false;
};

struct EnhancerSettings {
  double link_threshold = kDefaultLinkThreshold;
  Tokenization tokenization = Tokenization::space_tokenized;
  // Longest n-gram tried by the scan; 0 derives it from the graph's longest
  // entity name.
  std::size_t max_ngram = 0;
};

// Pre-retrieval stage: turns a question into retrieval seeds.
class QueryEnhancer {
 public:
  // `gateway` may be null when only EnhancementStrategy::none is used.
  QueryEnhancer(const EntityLinker& linker, const TemplateStore& templates,
                LlmGateway* gateway, EnhancerSettings settings = {});

  EnhancedQuery enhance(std::string_view question, EnhancementStrategy strategy) const;

  EnhancedQuery enhance_none(std::string_view question) const;
  EnhancedQuery enhance_understand(std::string_view question) const;
  EnhancedQuery enhance_expand(std::string_view question) const;
  EnhancedQuery enhance_decompose(std::string_view question) const;

  // Maximal non-overlapping n-grams that link into the graph, scanned
  // left to right trying the longest n-gram first.
  std::vector<std::string> scan_mentions(std::string_view text) const;

  std::size_t max_ngram() const { return max_ngram_; }

 private:
  std::string ask(std::string_view template_id, const TemplateVars& vars,
                  EnhancedQuery& record) const;
  bool linkable(std::string_view mention) const;
  // Whole-candidate link first, then an n-gram scan inside the candidate.
  std::vector<std::string> seeds_from_candidates(const std::vector<std::string>& candidates) const;
  void apply_fallback(EnhancedQuery& q) const;

  const EntityLinker& linker_;
  const TemplateStore& templates_;
  LlmGateway* gateway_;
  EnhancerSettings settings_;
  std::size_t max_ngram_ = 1;
};

// Splits an LLM list reply into items: one per line, bullets and
// numbering stripped, blank lines and "Header:" lines dropped. When
// `after_marker` is given and found, only lines after it are used.
std::vector<std::string> parse_list_reply(std::string_view reply,
                                          std::string_view after_marker = {});

}  // namespace kgrag
