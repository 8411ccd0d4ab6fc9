#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgrag/config.hpp"
#include "kgrag/pipeline.hpp"

namespace kgrag {

enum class Verdict { accept, revise };
std::string_view to_string(Verdict v);

struct MetaState {
  int iteration = 1;
  PipelineConfig config_used;
  Evidence evidence;
  std::string answer;
  double confidence = 0.0;
  Verdict verdict = Verdict::revise;
  std::string revision_note;
  std::string judge_reply;
  bool confidence_parsed = false;
};

struct MetaOutcome {
  std::string final_answer;
  std::vector<MetaState> states;
  // Full trace of the accepted iteration.
  PipelineResult final_result;
};

// First "CONFIDENCE:" followed by an integer, clamped to [0, 100].
std::optional<int> parse_confidence(std::string_view judge_reply);

// Config after one revision step; `changed` reports whether it differs.
PipelineConfig apply_revision(const PipelineConfig& config, Revision revision,
                              bool* changed = nullptr);

// Monitor / evaluate / regulate loop around the plain pipeline. Each
// iteration answers, asks the judge for a confidence, and on low confidence
// backtracks to a revised enhancement + retrieval configuration.
class MetaController {
 public:
  MetaController(const Pipeline& pipeline, LlmGateway& judge)
      : pipeline_(pipeline), judge_(judge) {}

  MetaOutcome run(std::string_view question, TaskKind task_kind, Tokenization tokenization,
                  const PipelineConfig& base_config, const MetaPolicy& policy) const;

 private:
  const Pipeline& pipeline_;
  LlmGateway& judge_;
};

nlohmann::ordered_json to_json(const MetaState& s);

}  // namespace kgrag
