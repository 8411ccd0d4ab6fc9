#include "kgrag/run_config.hpp"

#include <cstdlib>
#include <fstream>

#include "kgrag/errors.hpp"

namespace kgrag {

namespace {

EndpointConfig endpoint_from_json(const nlohmann::json& j, const EndpointConfig& base) {
  EndpointConfig e = base;
  if (j.is_null()) return e;
  if (!j.is_object()) throw ConfigError("endpoint settings must be an object");
  if (j.contains("backend")) {
    const std::string b = j["backend"].get<std::string>();
    if (b == "http")
      e.backend = BackendKind::http;
    else if (b == "mock")
      e.backend = BackendKind::mock;
    else
      throw ConfigError("unknown backend '" + b + "'");
  }
  GatewaySettings& s = e.settings;
  s.base_url = j.value("base_url", s.base_url);
  s.model_id = j.value("model_id", s.model_id);
  s.embedding_model_id = j.value("embedding_model_id", s.embedding_model_id);
  s.temperature = j.value("temperature", s.temperature);
  s.max_retries = j.value("max_retries", s.max_retries);
  s.max_in_flight = j.value("max_in_flight", s.max_in_flight);
  s.timeout_ms = j.value("timeout_ms", s.timeout_ms);
  s.backoff_initial_ms = j.value("backoff_initial_ms", s.backoff_initial_ms);
  s.embed_batch_size = j.value("embed_batch_size", s.embed_batch_size);
  if (s.max_retries < 0 || s.max_in_flight < 1 || s.timeout_ms < 1 || s.backoff_initial_ms < 0 ||
      s.embed_batch_size < 1)
    throw ConfigError("gateway limits out of range");
  if (j.contains("mock")) e.mock = MockScript::from_json(j["mock"]);
  if (e.backend == BackendKind::mock && !e.mock) e.mock = MockScript{};
  return e;
}

}  // namespace

TemplateStore RunConfig::templates() const {
  return templates_dir ? TemplateStore::from_directory(*templates_dir) : TemplateStore::builtin();
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  RunConfig c;
  try {
    EndpointConfig defaults;
    defaults.mock = MockScript{};
    if (const char* key = std::getenv(kApiKeyEnv)) defaults.settings.api_key = key;
    c.generator = endpoint_from_json(j.value("generator", nlohmann::json()), defaults);
    c.judge = endpoint_from_json(j.value("judge", nlohmann::json()), c.generator);
    c.embedder = endpoint_from_json(j.value("embedder", nlohmann::json()), c.generator);
    c.budget = budget_from_json(j.value("retrieval", nlohmann::json()));
    if (j.contains("linker")) {
      c.pipeline.link_threshold = j["linker"].value("threshold", c.pipeline.link_threshold);
      if (c.pipeline.link_threshold < 0.0 || c.pipeline.link_threshold > 1.0)
        throw ConfigError("linker threshold must lie in [0, 1]");
    }
    if (j.contains("prompt")) {
      const auto& p = j["prompt"];
      c.pipeline.context_budget_chars =
          p.value("context_budget_chars", c.pipeline.context_budget_chars);
      c.pipeline.max_output_chars = p.value("max_output_chars", c.pipeline.max_output_chars);
    }
    if (j.contains("meta") && !j["meta"].is_null()) c.meta = meta_policy_from_json(j["meta"]);
    if (j.contains("templates_dir")) c.templates_dir = j["templates_dir"].get<std::string>();
    if (j.contains("metrics")) {
      const auto& m = j["metrics"];
      c.metrics.mc = m.value("mc", c.metrics.mc);
      c.metrics.rouge = m.value("rouge", c.metrics.rouge);
      c.metrics.embed_sim = m.value("embed_sim", c.metrics.embed_sim);
      c.metrics.g_eval = m.value("g_eval", c.metrics.g_eval);
    }
    c.workers = j.value("workers", c.workers);
    if (c.workers < 1) throw ConfigError("workers must be at least 1");
    c.strict = j.value("strict", c.strict);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config file is not valid JSON: " + path.string());
  RunConfig c = run_config_from_json(j);
  if (c.templates_dir && c.templates_dir->is_relative())
    c.templates_dir = path.parent_path() / *c.templates_dir;
  return c;
}

std::unique_ptr<LlmGateway> make_gateway(const EndpointConfig& endpoint) {
  std::unique_ptr<LlmBackend> backend;
  switch (endpoint.backend) {
    case BackendKind::http:
      backend = std::make_unique<HttpBackend>(endpoint.settings);
      break;
    case BackendKind::mock:
      backend = std::make_unique<MockBackend>(endpoint.mock.value_or(MockScript{}));
      break;
    case BackendKind::custom:
      throw ConfigError("custom backends are constructed in code");
  }
  return std::make_unique<LlmGateway>(std::move(backend), endpoint.settings);
}

}  // namespace kgrag
