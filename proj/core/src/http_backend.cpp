#include <httplib.h>

#include <regex>

#include "kgrag/llm_gateway.hpp"

namespace kgrag {

namespace {

using json = nlohmann::json;

[[noreturn]] void protocol_error(const std::string& what) {
  throw GatewayError(GatewayError::Kind::protocol, what);
}

}  // namespace

HttpBackend::HttpBackend(GatewaySettings settings) : settings_(std::move(settings)) {
  static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(settings_.base_url, m, url_re))
    throw ConfigError("invalid base_url: " + settings_.base_url);
  scheme_host_port_ = m[1].str();
  path_prefix_ = m[2].matched ? m[2].str() : "";
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

json HttpBackend::chat_body(const ChatRequest& request) {
  return json{
      {"model", request.model_id},
      {"messages",
       json::array({json{{"role", "system"}, {"content", request.system}},
                    json{{"role", "user"}, {"content", request.user}}})},
      {"temperature", request.temperature.value_or(0.8)},
  };
}

std::string HttpBackend::parse_chat_response(std::string_view body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) protocol_error("chat response is not JSON");
  if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty())
    protocol_error("chat response has no choices");
  const json& choice = j["choices"][0];
  if (!choice.contains("message") || !choice["message"].contains("content") ||
      !choice["message"]["content"].is_string())
    protocol_error("chat response choice has no message content");
  return choice["message"]["content"].get<std::string>();
}

std::vector<EmbeddingVector> HttpBackend::parse_embedding_response(std::string_view body,
                                                                   std::size_t expected) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) protocol_error("embedding response is not JSON");
  if (!j.contains("data") || !j["data"].is_array())
    protocol_error("embedding response has no data array");
  std::vector<EmbeddingVector> out(expected);
  std::vector<bool> seen(expected, false);
  std::size_t position = 0;
  for (const json& item : j["data"]) {
    std::size_t index = item.value("index", position);
    ++position;
    if (index >= expected || seen[index]) protocol_error("embedding index out of range");
    if (!item.contains("embedding") || !item["embedding"].is_array())
      protocol_error("embedding item has no vector");
    for (const json& x : item["embedding"]) {
      if (!x.is_number()) protocol_error("embedding value is not a number");
      out[index].values.push_back(x.get<float>());
    }
    seen[index] = true;
  }
  for (bool s : seen)
    if (!s) protocol_error("embedding response is missing items");
  return out;
}

std::string HttpBackend::post(const std::string& path, const std::string& body) {
  httplib::Client client(scheme_host_port_);
  const auto timeout = std::chrono::milliseconds(settings_.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!settings_.api_key.empty())
    headers.emplace("Authorization", "Bearer " + settings_.api_key);

  auto result = client.Post(path_prefix_ + path, headers, body, "application/json");
  if (!result)
    throw GatewayError(GatewayError::Kind::transport,
                       "request to " + scheme_host_port_ + " failed: " +
                           httplib::to_string(result.error()));
  const int status = result->status;
  if (status >= 500 || status == 429)
    throw GatewayError(GatewayError::Kind::transport,
                       "server returned HTTP " + std::to_string(status));
  if (status != 200) protocol_error("server returned HTTP " + std::to_string(status));
  return result->body;
}

std::string HttpBackend::complete(const ChatRequest& request) {
  return parse_chat_response(post("/chat/completions", chat_body(request).dump(-1, ' ', false, json::error_handler_t::replace)));
}

std::vector<EmbeddingVector> HttpBackend::embed(std::span<const std::string> texts) {
  if (texts.empty()) return {};
  json body{{"model", settings_.embedding_model_id},
            {"input", std::vector<std::string>(texts.begin(), texts.end())}};
  return parse_embedding_response(post("/embeddings", body.dump(-1, ' ', false, json::error_handler_t::replace)), texts.size());
}

}  // namespace kgrag
