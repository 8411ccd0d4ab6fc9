#include "kgrag/pipeline.hpp"

#include <algorithm>

#include "kgrag/errors.hpp"
#include "kgrag/text.hpp"

namespace kgrag {

std::string prompt_hash(const AssembledPrompt& prompt) {
  return hex64(fnv1a64(prompt.system + '\x1f' + prompt.user));
}

Pipeline::Pipeline(const KnowledgeGraph& graph, LlmGateway* gateway,
                   const TemplateStore& templates, PipelineSettings settings)
    : graph_(graph),
      gateway_(gateway),
      templates_(templates),
      settings_(settings),
      linker_(graph),
      prompter_(templates) {
  EnhancerSettings es;
  es.link_threshold = settings_.link_threshold;
  es.tokenization = Tokenization::space_tokenized;
  space_enhancer_ = std::make_unique<QueryEnhancer>(linker_, templates_, gateway_, es);
  es.tokenization = Tokenization::char_tokenized;
  char_enhancer_ = std::make_unique<QueryEnhancer>(linker_, templates_, gateway_, es);
}

std::vector<EntityId> Pipeline::link_seeds(const std::vector<std::string>& seeds,
                                           std::vector<LinkResult>& links) const {
  std::vector<EntityId> ids;
  for (LinkResult& r : linker_.link(seeds, settings_.link_threshold)) {
    if (r.entity && std::find(ids.begin(), ids.end(), *r.entity) == ids.end())
      ids.push_back(*r.entity);
    links.push_back(std::move(r));
  }
  return ids;
}

PipelineResult Pipeline::retrieve_context(std::string_view question, TaskKind task_kind,
                                          Tokenization tokenization,
                                          const PipelineConfig& config) const {
  config.budget.validate();
  const QueryEnhancer& enhancer =
      tokenization == Tokenization::char_tokenized ? *char_enhancer_ : *space_enhancer_;
  PipelineResult result;
  result.enhanced = enhancer.enhance(question, config.enhancement);

  const bool per_clause = config.enhancement == EnhancementStrategy::decompose &&
                          !result.enhanced.clause_seeds.empty();
  if (per_clause) {
    std::vector<Evidence> parts;
    for (const auto& clause_seeds : result.enhanced.clause_seeds) {
      std::vector<EntityId> ids = link_seeds(clause_seeds, result.links);
      for (EntityId id : ids)
        if (std::find(result.seed_ids.begin(), result.seed_ids.end(), id) == result.seed_ids.end())
          result.seed_ids.push_back(id);
      parts.push_back(retrieve(graph_, ids, config.form, config.budget));
    }
    result.evidence = merge_evidence(parts, config.form, config.budget);
  } else {
    result.seed_ids = link_seeds(result.enhanced.seeds, result.links);
    result.evidence = retrieve(graph_, result.seed_ids, config.form, config.budget);
  }

  result.prompt = prompter_.assemble(question, result.evidence,
                                     PromptPattern::standard(config.prompt), task_kind,
                                     settings_.context_budget_chars);
  result.prompt_hash = prompt_hash(result.prompt);
  return result;
}

void Pipeline::generate(PipelineResult& result) const {
  if (!gateway_) throw ConfigError("answer generation needs an LLM gateway");
  ChatRequest request;
  request.system = result.prompt.system;
  request.user = result.prompt.user;
  request.max_output_chars = settings_.max_output_chars;
  ChatResponse response = gateway_->chat(std::move(request));
  result.response = std::move(response.text);
  result.attempts = response.attempt_count;
  result.latency_ms = response.latency_ms;
}

PipelineResult Pipeline::run(std::string_view question, TaskKind task_kind,
                             Tokenization tokenization, const PipelineConfig& config) const {
  PipelineResult result = retrieve_context(question, task_kind, tokenization, config);
  generate(result);
  return result;
}

}  // namespace kgrag
