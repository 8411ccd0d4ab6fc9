#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "kgrag/config.hpp"
#include "kgrag/enhancer.hpp"
#include "kgrag/kg_store.hpp"
#include "kgrag/linker.hpp"
#include "kgrag/llm_gateway.hpp"
#include "kgrag/prompter.hpp"
#include "kgrag/retriever.hpp"

namespace kgrag {

struct PipelineSettings {
  double link_threshold = kDefaultLinkThreshold;
  std::size_t context_budget_chars = 16000;
  std::size_t max_output_chars = 0;
};

struct PipelineResult {
  EnhancedQuery enhanced;
  std::vector<LinkResult> links;
  std::vector<EntityId> seed_ids;
  Evidence evidence;
  AssembledPrompt prompt;
  std::string prompt_hash;
  std::string response;
  int attempts = 0;
  std::int64_t latency_ms = 0;
};

// enhance -> link -> retrieve -> assemble -> chat for one question.
class Pipeline {
 public:
  Pipeline(const KnowledgeGraph& graph, LlmGateway* gateway, const TemplateStore& templates,
           PipelineSettings settings = {});

  PipelineResult run(std::string_view question, TaskKind task_kind, Tokenization tokenization,
                     const PipelineConfig& config) const;

  // Stages before generation; `run` is retrieve_context + generate.
  PipelineResult retrieve_context(std::string_view question, TaskKind task_kind,
                                  Tokenization tokenization,
                                  const PipelineConfig& config) const;
  void generate(PipelineResult& result) const;

  const KnowledgeGraph& graph() const { return graph_; }
  const TemplateStore& templates() const { return templates_; }
  LlmGateway* gateway() const { return gateway_; }

 private:
  std::vector<EntityId> link_seeds(const std::vector<std::string>& seeds,
                                   std::vector<LinkResult>& links) const;

  const KnowledgeGraph& graph_;
  LlmGateway* gateway_;
  const TemplateStore& templates_;
  PipelineSettings settings_;
  EntityLinker linker_;
  std::unique_ptr<QueryEnhancer> space_enhancer_;
  std::unique_ptr<QueryEnhancer> char_enhancer_;
  Prompter prompter_;
};

std::string prompt_hash(const AssembledPrompt& prompt);

}  // namespace kgrag
