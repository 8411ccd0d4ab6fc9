#include "kgrag/prompter.hpp"

#include <vector>

#include "kgrag/enhancer.hpp"
#include "kgrag/errors.hpp"
#include "kgrag/text.hpp"

namespace kgrag {

std::string_view to_string(PromptKind kind) {
  switch (kind) {
    case PromptKind::direct:
      return "direct";
    case PromptKind::cot:
      return "cot";
    case PromptKind::tot:
      return "tot";
    case PromptKind::mindmap:
      return "mindmap";
  }
  return "direct";
}

std::optional<PromptKind> parse_prompt_kind(std::string_view text) {
  if (text == "direct" || text == "none") return PromptKind::direct;
  if (text == "cot") return PromptKind::cot;
  if (text == "tot") return PromptKind::tot;
  if (text == "mindmap") return PromptKind::mindmap;
  return std::nullopt;
}

std::string_view to_string(TaskKind kind) {
  return kind == TaskKind::mc_qa ? "mc_qa" : "generation";
}

std::optional<TaskKind> parse_task_kind(std::string_view text) {
  if (text == "mc_qa") return TaskKind::mc_qa;
  if (text == "generation") return TaskKind::generation;
  return std::nullopt;
}

PromptPattern PromptPattern::standard(PromptKind kind) {
  switch (kind) {
    case PromptKind::direct:
      return {kind, std::string(template_ids::kAnswerDirect)};
    case PromptKind::cot:
      return {kind, std::string(template_ids::kAnswerCot)};
    case PromptKind::tot:
      return {kind, std::string(template_ids::kAnswerTot)};
    case PromptKind::mindmap:
      return {kind, std::string(template_ids::kAnswerMindMap)};
  }
  return {kind, std::string(template_ids::kAnswerDirect)};
}

namespace {

std::string fact_line(const Triple& t) {
  return t.subject + " | " + t.predicate + " | " + t.object;
}

std::string path_line(const Path& p) {
  std::string line = p.nodes.empty() ? std::string() : p.nodes.front();
  for (std::size_t i = 0; i < p.hops.size(); ++i) {
    if (p.reversed(i)) {
      line += " <-[" + p.hops[i].predicate + "]- ";
    } else {
      line += " -[" + p.hops[i].predicate + "]-> ";
    }
    line += p.nodes[i + 1];
  }
  return line;
}

std::vector<std::string> evidence_lines(const Evidence& e) {
  std::vector<std::string> lines;
  switch (e.form) {
    case RetrievalForm::fact:
      for (const Triple& t : e.facts) lines.push_back(fact_line(t));
      break;
    case RetrievalForm::path:
      for (const Path& p : e.paths) lines.push_back(path_line(p));
      break;
    case RetrievalForm::subgraph:
      for (const Path& p : e.paths) lines.push_back(path_line(p));
      if (!e.neighbor_facts.empty()) {
        if (!lines.empty()) lines.emplace_back();
        lines.emplace_back("Neighbors:");
        for (const Triple& t : e.neighbor_facts) lines.push_back(fact_line(t));
      }
      break;
  }
  return lines;
}

// Drops dangling separators left after tail truncation.
void trim_trailing_structure(std::vector<std::string>& lines) {
  while (!lines.empty() && (lines.back().empty() || lines.back() == "Neighbors:"))
    lines.pop_back();
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '\n';
    out += lines[i];
  }
  return out;
}

constexpr std::string_view kMarkerPrefix = "### Answering mode: ";

}  // namespace

std::string serialize_evidence(const Evidence& e) {
  std::vector<std::string> lines = evidence_lines(e);
  if (lines.empty()) return std::string(kNoEvidenceSentinel);
  return join_lines(lines);
}

std::optional<PromptKind> detect_prompt_kind(std::string_view prompt) {
  const auto pos = prompt.find(kMarkerPrefix);
  if (pos == std::string_view::npos) return std::nullopt;
  std::string_view rest = prompt.substr(pos + kMarkerPrefix.size());
  rest = rest.substr(0, rest.find('\n'));
  rest = trim(rest);
  if (rest == "DIRECT") return PromptKind::direct;
  if (rest == "CHAIN-OF-THOUGHT") return PromptKind::cot;
  if (rest == "TREE-OF-THOUGHT") return PromptKind::tot;
  if (rest == "MIND-MAP") return PromptKind::mindmap;
  return std::nullopt;
}

AssembledPrompt Prompter::assemble(std::string_view question, const Evidence& evidence,
                                   const PromptPattern& pattern, TaskKind task_kind,
                                   std::size_t context_budget_chars) const {
  const std::string system = templates_.text(template_ids::kSystem);
  const std::string format = templates_.text(task_kind == TaskKind::mc_qa
                                                  ? template_ids::kFormatMcQa
                                                  : template_ids::kFormatGeneration);
  auto render = [&](const std::string& block) {
    return templates_.render(pattern.template_id, {{"question", std::string(question)},
                                                   {"evidence", block},
                                                   {"format_instruction", format}});
  };
  auto fits = [&](const std::string& user) {
    return code_point_length(system) + code_point_length(user) <= context_budget_chars;
  };

  AssembledPrompt out;
  out.system = system;
  out.template_id = pattern.template_id;

  std::vector<std::string> lines = evidence_lines(evidence);
  const std::size_t total = lines.size();
  const std::string sentinel(kNoEvidenceSentinel);
  if (!fits(render(sentinel)))
    throw BudgetTooSmall("context budget of " + std::to_string(context_budget_chars) +
                         " characters cannot hold the empty-evidence prompt");

  while (true) {
    trim_trailing_structure(lines);
    const std::string block = lines.empty() ? sentinel : join_lines(lines);
    std::string user = render(block);
    if (fits(user) || lines.empty()) {
      out.user = std::move(user);
      out.evidence_char_count = lines.empty() ? 0 : code_point_length(block);
      break;
    }
    lines.pop_back();
  }
  out.truncated = lines.size() < total;
  return out;
}

AssembledPrompt Prompter::assemble(const EnhancedQuery& query, const Evidence& evidence,
                                   const PromptPattern& pattern, TaskKind task_kind,
                                   std::size_t context_budget_chars) const {
  return assemble(query.original, evidence, pattern, task_kind, context_budget_chars);
}

}  // namespace kgrag
