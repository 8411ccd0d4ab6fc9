#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "kgrag/config.hpp"
#include "kgrag/harness.hpp"
#include "kgrag/llm_gateway.hpp"
#include "kgrag/pipeline.hpp"
#include "kgrag/retriever.hpp"
#include "kgrag/templates.hpp"

namespace kgrag {

inline constexpr const char* kApiKeyEnv = "KGRAG_API_KEY";

struct EndpointConfig {
  BackendKind backend = BackendKind::mock;
  GatewaySettings settings;
  std::optional<MockScript> mock;
};

// Every module setting for one run, read from a single JSON document:
//
//   {"generator": {"backend": "http"|"mock", "base_url", "model_id", ...,
//                  "mock": {"rules": [...], "embeddings": {...}}},
//    "judge": {... same shape, fields default to the generator's ...},
//    "embedder": {... same shape ...},
//    "retrieval": {"max_hops", "max_paths_per_pair", "max_facts",
//                  "max_neighbors_per_node"},
//    "linker": {"threshold"}, "prompt": {"context_budget_chars",
//    "max_output_chars"}, "meta": {...}, "templates_dir": "...",
//    "metrics": {"mc", "rouge", "embed_sim", "g_eval"},
//    "workers": 4, "strict": false}
//
// The API key is never read from the file; it comes from KGRAG_API_KEY.
struct RunConfig {
  EndpointConfig generator;
  EndpointConfig judge;
  EndpointConfig embedder;
  RetrievalBudget budget;
  PipelineSettings pipeline;
  std::optional<MetaPolicy> meta;
  std::optional<std::filesystem::path> templates_dir;
  MetricToggles metrics;
  int workers = 1;
  bool strict = false;

  TemplateStore templates() const;
};

RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

std::unique_ptr<LlmGateway> make_gateway(const EndpointConfig& endpoint);

}  // namespace kgrag
