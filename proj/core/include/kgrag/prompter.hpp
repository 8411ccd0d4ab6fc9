#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "kgrag/retriever.hpp"
#include "kgrag/templates.hpp"

namespace kgrag {

struct EnhancedQuery;

enum class PromptKind { direct, cot, tot, mindmap };
std::string_view to_string(PromptKind kind);
std::optional<PromptKind> parse_prompt_kind(std::string_view text);

enum class TaskKind { mc_qa, generation };
std::string_view to_string(TaskKind kind);
std::optional<TaskKind> parse_task_kind(std::string_view text);

struct PromptPattern {
  PromptKind kind = PromptKind::direct;
  std::string template_id;

  // The built-in template for `kind`.
  static PromptPattern standard(PromptKind kind);
};

struct AssembledPrompt {
  std::string system;
  std::string user;
  std::size_t evidence_char_count = 0;
  bool truncated = false;
  std::string template_id;
};

inline constexpr std::string_view kNoEvidenceSentinel = "NO EXTERNAL KNOWLEDGE FOUND";
inline constexpr std::string_view kFinalAnswerMarker = "Final answer:";

// fact:     "subject | predicate | object" per line
// path:     "e0 -[p1]-> e1 <-[p2]- e2" per line ("<-" marks a reversed hop)
// subgraph: path block, blank line, "Neighbors:", fact block
std::string serialize_evidence(const Evidence& e);

// The first marker line of the rendered scaffold (e.g. "### Answering mode:
// CHAIN-OF-THOUGHT"); recovers the pattern kind from an emitted prompt.
std::optional<PromptKind> detect_prompt_kind(std::string_view prompt);

class Prompter {
 public:
  explicit Prompter(const TemplateStore& templates) : templates_(templates) {}

  // Evidence is cut tail-first, line by line, until system + user fit in
  // `context_budget_chars` code points. Throws BudgetTooSmall when even the
  // empty-evidence prompt does not fit.
  AssembledPrompt assemble(std::string_view question, const Evidence& evidence,
                           const PromptPattern& pattern, TaskKind task_kind,
                           std::size_t context_budget_chars) const;
  AssembledPrompt assemble(const EnhancedQuery& query, const Evidence& evidence,
                           const PromptPattern& pattern, TaskKind task_kind,
                           std::size_t context_budget_chars) const;

 private:
  const TemplateStore& templates_;
};

}  // namespace kgrag
