#include "kgrag/meta_controller.hpp"

#include <algorithm>
#include <regex>

#include "kgrag/text.hpp"

namespace kgrag {

std::string_view to_string(Verdict v) { return v == Verdict::accept ? "accept" : "revise"; }

std::optional<int> parse_confidence(std::string_view judge_reply) {
  static const std::regex pattern(R"(CONFIDENCE:\s*(-?\d+))");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(judge_reply.begin(), judge_reply.end(), m, pattern)) return std::nullopt;
  long value = 0;
  try {
    value = std::stol(m[1].str());
  } catch (const std::out_of_range&) {
    value = m[1].str().starts_with('-') ? 0 : 100;
  }
  return static_cast<int>(std::clamp<long>(value, 0, 100));
}

PipelineConfig apply_revision(const PipelineConfig& config, Revision revision, bool* changed) {
  PipelineConfig next = config;
  switch (revision) {
    case Revision::widen_seeds:
      next.enhancement = EnhancementStrategy::expand;
      break;
    case Revision::switch_form:
      if (next.form == RetrievalForm::fact) {
        next.form = RetrievalForm::path;
      } else if (next.form == RetrievalForm::path) {
        next.form = RetrievalForm::subgraph;
      }
      break;
    case Revision::raise_hops:
      next.budget.max_hops += 1;
      break;
  }
  if (changed) *changed = !(next == config);
  return next;
}

namespace {

std::string critique_line(std::string_view reply) {
  for (std::string_view line : split_lines(reply)) {
    line = trim(line);
    if (line.empty() || line.starts_with("CONFIDENCE:")) continue;
    if (line.starts_with("CRITIQUE:")) line = trim(line.substr(9));
    return std::string(line);
  }
  return {};
}

}  // namespace

MetaOutcome MetaController::run(std::string_view question, TaskKind task_kind,
                                Tokenization tokenization, const PipelineConfig& base_config,
                                const MetaPolicy& policy) const {
  policy.validate();
  MetaOutcome outcome;
  PipelineConfig config = base_config;
  std::size_t ladder_pos = 0;

  for (int iteration = 1; iteration <= policy.max_iterations; ++iteration) {
    PipelineResult result = pipeline_.run(question, task_kind, tokenization, config);

    ChatRequest request;
    request.system = pipeline_.templates().text(template_ids::kSystem);
    request.user = pipeline_.templates().render(
        policy.judge_template, {{"question", std::string(question)},
                                {"evidence", serialize_evidence(result.evidence)},
                                {"answer", result.response}});
    std::string reply = judge_.chat(std::move(request)).text;

    MetaState state;
    state.iteration = iteration;
    state.config_used = config;
    state.evidence = result.evidence;
    state.answer = result.response;
    const std::optional<int> parsed = parse_confidence(reply);
    state.confidence_parsed = parsed.has_value();
    state.confidence = parsed ? *parsed / 100.0 : 0.0;
    state.judge_reply = reply;
    state.revision_note = critique_line(reply);

    const bool last = iteration == policy.max_iterations;
    if (state.confidence >= policy.confidence_threshold || last) {
      state.verdict = Verdict::accept;
      outcome.final_answer = state.answer;
      outcome.final_result = std::move(result);
      outcome.states.push_back(std::move(state));
      break;
    }

    // Next ladder step that changes the configuration; past the end the
    // final step is reused.
    const auto& ladder = policy.revision_ladder;
    std::size_t step = ladder_pos;
    bool changed = false;
    PipelineConfig revised;
    for (; step < ladder.size(); ++step) {
      revised = apply_revision(config, ladder[step], &changed);
      if (changed) break;
    }
    if (step >= ladder.size()) {
      step = ladder.size() - 1;
      revised = apply_revision(config, ladder[step], &changed);
    }
    ladder_pos = step + 1;
    state.verdict = Verdict::revise;
    state.revision_note += std::string(state.revision_note.empty() ? "" : " ") + "[revision: " +
                           std::string(to_string(ladder[step])) + "]";
    config = revised;
    outcome.states.push_back(std::move(state));
  }
  return outcome;
}

nlohmann::ordered_json to_json(const MetaState& s) {
  nlohmann::ordered_json j;
  j["iteration"] = s.iteration;
  j["config"] = to_json(s.config_used);
  j["evidence"] = to_json(s.evidence);
  j["answer"] = s.answer;
  j["confidence"] = s.confidence;
  j["confidence_parsed"] = s.confidence_parsed;
  j["verdict"] = std::string(to_string(s.verdict));
  j["revision_note"] = s.revision_note;
  j["judge_reply"] = s.judge_reply;
  return j;
}

}  // namespace kgrag
