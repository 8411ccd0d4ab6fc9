#include <cmath>
#include <numbers>

#include "kgrag/llm_gateway.hpp"
#include "kgrag/text.hpp"

namespace kgrag {

MockScript MockScript::from_json(const nlohmann::json& j) {
  MockScript script;
  if (!j.is_object()) throw ConfigError("mock script must be an object");
  for (const auto& r : j.value("rules", nlohmann::json::array())) {
    MockRule rule;
    rule.pattern = r.at("pattern").get<std::string>();
    if (r.contains("responses")) {
      rule.responses = r["responses"].get<std::vector<std::string>>();
    } else {
      rule.responses.push_back(r.at("response").get<std::string>());
    }
    if (rule.responses.empty()) throw ConfigError("mock rule without responses: " + rule.pattern);
    rule.expand = r.value("expand", false);
    rule.fail_first = r.value("fail_first", 0);
    script.rules.push_back(std::move(rule));
  }
  script.embedding_dim = j.value("embedding_dim", std::size_t{64});
  if (j.contains("embeddings")) {
    for (const auto& [text, values] : j["embeddings"].items())
      script.embeddings.emplace_back(text, values.get<std::vector<float>>());
  }
  return script;
}

MockBackend::MockBackend(MockScript script) : script_(std::move(script)) {
  for (const MockRule& rule : script_.rules) {
    try {
      rules_.push_back(CompiledRule{rule, std::regex(rule.pattern, std::regex::ECMAScript)});
    } catch (const std::regex_error& e) {
      throw ConfigError("bad mock pattern '" + rule.pattern + "': " + e.what());
    }
  }
  if (script_.embedding_dim == 0) throw ConfigError("embedding_dim must be positive");
}

std::string MockBackend::complete(const ChatRequest& request) {
  std::lock_guard lock(mutex_);
  ++calls_;
  for (CompiledRule& compiled : rules_) {
    std::smatch match;
    if (!std::regex_search(request.user, match, compiled.regex)) continue;
    if (compiled.failures < compiled.rule.fail_first) {
      ++compiled.failures;
      throw GatewayError(GatewayError::Kind::transport,
                         "scripted transport failure for '" + compiled.rule.pattern + "'");
    }
    const auto& responses = compiled.rule.responses;
    const std::string& reply = responses[std::min(compiled.served, responses.size() - 1)];
    ++compiled.served;
    return compiled.rule.expand ? match.format(reply) : reply;
  }
  throw GatewayError(GatewayError::Kind::protocol, "no mock rule matches the request");
}

EmbeddingVector MockBackend::hash_embedding(std::string_view text, std::size_t dim) {
  // splitmix64 stream seeded by the text hash; Box-Muller for a Gaussian
  // direction, then normalized.
  std::uint64_t state = fnv1a64(text);
  auto next = [&state] {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  auto uniform = [&] { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; };
  std::vector<double> raw(dim);
  double norm = 0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double u1 = uniform();
    const double u2 = uniform();
    raw[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    norm += raw[i] * raw[i];
  }
  norm = std::sqrt(norm);
  EmbeddingVector v;
  v.values.reserve(dim);
  for (double x : raw) v.values.push_back(static_cast<float>(x / norm));
  return v;
}

std::vector<EmbeddingVector> MockBackend::embed(std::span<const std::string> texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const std::string& text : texts) {
    bool fixed = false;
    for (const auto& [key, values] : script_.embeddings) {
      if (key == text) {
        out.push_back(EmbeddingVector{values});
        fixed = true;
        break;
      }
    }
    if (!fixed) out.push_back(hash_embedding(text, script_.embedding_dim));
  }
  return out;
}

std::size_t MockBackend::call_count() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

}  // namespace kgrag
