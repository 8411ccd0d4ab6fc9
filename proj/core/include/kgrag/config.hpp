#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgrag/enhancer.hpp"
#include "kgrag/prompter.hpp"
#include "kgrag/retriever.hpp"
#include "kgrag/templates.hpp"

namespace kgrag {

// One backtracking step of the metacognitive loop.
enum class Revision {
  widen_seeds,  // switch enhancement to expand
  switch_form,  // fact -> path -> subgraph
  raise_hops,   // max_hops + 1
};
std::string_view to_string(Revision r);
std::optional<Revision> parse_revision(std::string_view text);

struct MetaPolicy {
  int max_iterations = 3;
  double confidence_threshold = 0.7;
  std::vector<Revision> revision_ladder = {Revision::widen_seeds, Revision::switch_form,
                                           Revision::raise_hops};
  std::string judge_template = std::string(template_ids::kMetaJudge);

  void validate() const;
  bool operator==(const MetaPolicy&) const = default;
};

// One cell of the configuration space.
struct PipelineConfig {
  EnhancementStrategy enhancement = EnhancementStrategy::none;
  RetrievalForm form = RetrievalForm::fact;
  PromptKind prompt = PromptKind::direct;
  RetrievalBudget budget;
  std::optional<MetaPolicy> meta;
  std::optional<std::string> preset_name;

  // Stable identifier used to key run records.
  std::string key() const;
  bool operator==(const PipelineConfig&) const = default;
};

// kgrag, tog, mindmap, rok, kggpt, pilot, meta.
std::span<const std::string_view> preset_names();

// Only pilot and meta accept form/prompt overrides; other presets pin
// every field and reject overrides with ConfigError.
PipelineConfig preset(std::string_view name, std::optional<RetrievalForm> form = std::nullopt,
                      std::optional<PromptKind> prompt = std::nullopt,
                      const RetrievalBudget& budget = {});

// Cartesian product ordered by enhancement, then form, then prompt.
std::vector<PipelineConfig> expand_grid(std::span<const RetrievalForm> forms,
                                        std::span<const PromptKind> prompts,
                                        std::span<const EnhancementStrategy> enhancements,
                                        const RetrievalBudget& budget = {});

nlohmann::ordered_json to_json(const PipelineConfig& c);
nlohmann::ordered_json to_json(const MetaPolicy& p);
PipelineConfig config_from_json(const nlohmann::json& j);
MetaPolicy meta_policy_from_json(const nlohmann::json& j);
RetrievalBudget budget_from_json(const nlohmann::json& j, RetrievalBudget base = {});

}  // namespace kgrag
