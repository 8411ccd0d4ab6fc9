#include "kgrag/config.hpp"

#include <array>

#include "kgrag/errors.hpp"

namespace kgrag {

std::string_view to_string(Revision r) {
  switch (r) {
    case Revision::widen_seeds:
      return "widen_seeds";
    case Revision::switch_form:
      return "switch_form";
    case Revision::raise_hops:
      return "raise_hops";
  }
  return "widen_seeds";
}

std::optional<Revision> parse_revision(std::string_view text) {
  if (text == "widen_seeds" || text == "expand") return Revision::widen_seeds;
  if (text == "switch_form") return Revision::switch_form;
  if (text == "raise_hops") return Revision::raise_hops;
  return std::nullopt;
}

void MetaPolicy::validate() const {
  if (max_iterations < 1) throw ConfigError("meta max_iterations must be >= 1");
  if (!(confidence_threshold >= 0.0 && confidence_threshold <= 1.0))
    throw ConfigError("meta confidence_threshold must lie in [0, 1]");
  if (revision_ladder.empty()) throw ConfigError("meta revision_ladder must not be empty");
}

std::string PipelineConfig::key() const {
  std::string k = "enh=" + std::string(to_string(enhancement)) +
                  ";form=" + std::string(to_string(form)) +
                  ";prompt=" + std::string(to_string(prompt)) +
                  ";hops=" + std::to_string(budget.max_hops) +
                  ";paths=" + std::to_string(budget.max_paths_per_pair) +
                  ";facts=" + std::to_string(budget.max_facts) +
                  ";nbrs=" + std::to_string(budget.max_neighbors_per_node);
  if (meta) {
    k += ";meta=" + std::to_string(meta->max_iterations) + "/" +
         std::to_string(meta->confidence_threshold);
    for (Revision r : meta->revision_ladder) k += "," + std::string(to_string(r));
  }
  if (preset_name) k = *preset_name + ":" + k;
  return k;
}

namespace {
constexpr std::array<std::string_view, 7> kPresets = {"kgrag", "tog", "mindmap", "rok",
                                                      "kggpt", "pilot", "meta"};
}  // namespace

std::span<const std::string_view> preset_names() { return kPresets; }

PipelineConfig preset(std::string_view name, std::optional<RetrievalForm> form,
                      std::optional<PromptKind> prompt, const RetrievalBudget& budget) {
  PipelineConfig c;
  c.budget = budget;
  c.preset_name = std::string(name);
  const bool configurable = name == "pilot" || name == "meta";
  if (!configurable && (form || prompt))
    throw ConfigError("preset '" + std::string(name) + "' pins its form and prompt");
  using E = EnhancementStrategy;
  using F = RetrievalForm;
  using P = PromptKind;
  auto pin = [&c](E e, F f, P p) {
    c.enhancement = e;
    c.form = f;
    c.prompt = p;
  };
  if (name == "kgrag") {
    pin(E::none, F::fact, P::direct);
  } else if (name == "tog") {
    pin(E::none, F::path, P::direct);
  } else if (name == "mindmap") {
    pin(E::none, F::subgraph, P::mindmap);
  } else if (name == "rok") {
    pin(E::expand, F::path, P::cot);
  } else if (name == "kggpt") {
    pin(E::decompose, F::subgraph, P::cot);
  } else if (name == "pilot") {
    c.enhancement = E::understand;
    c.form = form.value_or(F::path);
    c.prompt = prompt.value_or(P::mindmap);
  } else if (name == "meta") {
    c.enhancement = E::understand;
    c.form = form.value_or(F::fact);
    c.prompt = prompt.value_or(P::direct);
    c.meta = MetaPolicy{};
  } else {
    throw ConfigError("unknown preset: " + std::string(name));
  }
  return c;
}

std::vector<PipelineConfig> expand_grid(std::span<const RetrievalForm> forms,
                                        std::span<const PromptKind> prompts,
                                        std::span<const EnhancementStrategy> enhancements,
                                        const RetrievalBudget& budget) {
  std::vector<PipelineConfig> out;
  for (EnhancementStrategy e : enhancements)
    for (RetrievalForm f : forms)
      for (PromptKind p : prompts) {
        PipelineConfig c;
        c.enhancement = e;
        c.form = f;
        c.prompt = p;
        c.budget = budget;
        out.push_back(std::move(c));
      }
  return out;
}

nlohmann::ordered_json to_json(const MetaPolicy& p) {
  nlohmann::ordered_json j;
  j["max_iterations"] = p.max_iterations;
  j["confidence_threshold"] = p.confidence_threshold;
  auto ladder = nlohmann::ordered_json::array();
  for (Revision r : p.revision_ladder) ladder.push_back(std::string(to_string(r)));
  j["revision_ladder"] = std::move(ladder);
  j["judge_template"] = p.judge_template;
  return j;
}

nlohmann::ordered_json to_json(const PipelineConfig& c) {
  nlohmann::ordered_json j;
  j["preset"] = c.preset_name ? nlohmann::ordered_json(*c.preset_name) : nlohmann::ordered_json(nullptr);
  j["enhancement"] = std::string(to_string(c.enhancement));
  j["form"] = std::string(to_string(c.form));
  j["prompt"] = std::string(to_string(c.prompt));
  j["budget"] = {{"max_hops", c.budget.max_hops},
                 {"max_paths_per_pair", c.budget.max_paths_per_pair},
                 {"max_facts", c.budget.max_facts},
                 {"max_neighbors_per_node", c.budget.max_neighbors_per_node}};
  j["meta"] = c.meta ? to_json(*c.meta) : nlohmann::ordered_json(nullptr);
  return j;
}

RetrievalBudget budget_from_json(const nlohmann::json& j, RetrievalBudget b) {
  if (j.is_null()) return b;
  b.max_hops = j.value("max_hops", b.max_hops);
  b.max_paths_per_pair = j.value("max_paths_per_pair", b.max_paths_per_pair);
  b.max_facts = j.value("max_facts", b.max_facts);
  b.max_neighbors_per_node = j.value("max_neighbors_per_node", b.max_neighbors_per_node);
  b.validate();
  return b;
}

MetaPolicy meta_policy_from_json(const nlohmann::json& j) {
  MetaPolicy p;
  p.max_iterations = j.value("max_iterations", p.max_iterations);
  p.confidence_threshold = j.value("confidence_threshold", p.confidence_threshold);
  if (j.contains("revision_ladder")) {
    p.revision_ladder.clear();
    for (const auto& r : j["revision_ladder"]) {
      auto parsed = parse_revision(r.get<std::string>());
      if (!parsed) throw ConfigError("unknown revision: " + r.get<std::string>());
      p.revision_ladder.push_back(*parsed);
    }
  }
  p.judge_template = j.value("judge_template", p.judge_template);
  p.validate();
  return p;
}

PipelineConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("pipeline config must be a JSON object");
  PipelineConfig c;
  try {
    auto field = [&](const char* key, std::string_view fallback) {
      return j.contains(key) ? j[key].get<std::string>() : std::string(fallback);
    };
    auto e = parse_enhancement(field("enhancement", "none"));
    auto f = parse_retrieval_form(field("form", "fact"));
    auto p = parse_prompt_kind(field("prompt", "direct"));
    if (!e || !f || !p) throw ConfigError("invalid pipeline config: " + j.dump());
    c.enhancement = *e;
    c.form = *f;
    c.prompt = *p;
    c.budget = budget_from_json(j.value("budget", nlohmann::json(nullptr)));
    if (j.contains("meta") && !j["meta"].is_null()) c.meta = meta_policy_from_json(j["meta"]);
    if (j.contains("preset") && !j["preset"].is_null()) c.preset_name = j["preset"].get<std::string>();
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("invalid pipeline config: ") + ex.what());
  }
  return c;
}

}  // namespace kgrag
