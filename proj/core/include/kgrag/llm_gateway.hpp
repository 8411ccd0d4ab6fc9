#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgrag/errors.hpp"

namespace kgrag {

enum class BackendKind { http, mock, custom };
std::string_view to_string(BackendKind kind);

struct ChatRequest {
  std::string system;
  std::string user;
  // Unset uses the gateway's configured temperature (0.8 by default).
  std::optional<double> temperature;
  // 0 means unlimited; otherwise the reply is cut to this many code points.
  std::size_t max_output_chars = 0;
  // Empty selects the gateway's configured model.
  std::string model_id;
};

struct ChatResponse {
  std::string text;
  std::int64_t latency_ms = 0;
  BackendKind backend = BackendKind::mock;
  int attempt_count = 1;
};

struct EmbeddingVector {
  std::vector<float> values;

  std::size_t dim() const { return values.size(); }
};

class GatewayError : public Error {
 public:
  enum class Kind { transport, protocol, exhausted };

  GatewayError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::string_view to_string(GatewayError::Kind kind);

// A single completion/embedding provider. Implementations throw
// GatewayError; transport errors are retried by LlmGateway, protocol
// errors are not.
class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual BackendKind kind() const = 0;
  virtual std::string complete(const ChatRequest& request) = 0;
  virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) = 0;
};

struct GatewaySettings {
  std::string base_url = "http://127.0.0.1:8080/v1";
  std::string model_id = "default";
  std::string embedding_model_id = "default";
  double temperature = 0.8;
  int max_retries = 3;
  int max_in_flight = 4;
  int timeout_ms = 120000;
  int backoff_initial_ms = 250;
  std::string api_key;
  // Texts per embedding request.
  std::size_t embed_batch_size = 64;
};

// Counting gate bounding simultaneous outstanding requests.
class InFlightLimiter {
 public:
  explicit InFlightLimiter(int limit);

  class Permit {
   public:
    explicit Permit(InFlightLimiter& owner);
    ~Permit();
    Permit(const Permit&) = delete;
    Permit& operator=(const Permit&) = delete;

   private:
    InFlightLimiter& owner_;
  };

  int limit() const { return limit_; }

 private:
  void acquire();
  void release();

  int limit_;
  int active_ = 0;
  std::mutex mutex_;
  std::condition_variable cv_;
};

// Shareable front end over one backend: applies defaults, bounds in-flight
// requests and retries transport failures with exponential backoff.
class LlmGateway {
 public:
  LlmGateway(std::unique_ptr<LlmBackend> backend, GatewaySettings settings);

  ChatResponse chat(ChatRequest request);
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts);

  const GatewaySettings& settings() const { return settings_; }
  BackendKind backend_kind() const { return backend_->kind(); }

 private:
  template <typename Fn>
  auto with_retries(Fn&& fn, int* attempts);

  std::unique_ptr<LlmBackend> backend_;
  GatewaySettings settings_;
  InFlightLimiter limiter_;
};

// OpenAI-compatible chat-completions / embeddings client.
class HttpBackend : public LlmBackend {
 public:
  explicit HttpBackend(GatewaySettings settings);

  BackendKind kind() const override { return BackendKind::http; }
  std::string complete(const ChatRequest& request) override;
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;

  static nlohmann::json chat_body(const ChatRequest& request);
  // Extracts choices[0].message.content; throws GatewayError::protocol.
  static std::string parse_chat_response(std::string_view body);
  static std::vector<EmbeddingVector> parse_embedding_response(std::string_view body,
                                                              std::size_t expected);

 private:
  std::string post(const std::string& path, const std::string& body);

  GatewaySettings settings_;
  std::string scheme_host_port_;
  std::string path_prefix_;
};

// One scripted reply rule. The pattern is searched (unanchored, ECMAScript)
// in the user message. Responses are served in order; the last one repeats.
struct MockRule {
  std::string pattern;
  std::vector<std::string> responses;
  // Interpret responses as std::regex format strings ($1, $&, ...).
  bool expand = false;
  // The first N matching calls fail with a transport error.
  int fail_first = 0;
};

struct MockScript {
  std::vector<MockRule> rules;
  std::size_t embedding_dim = 64;
  // Fixed vectors by exact text; other texts get hash-derived vectors.
  std::vector<std::pair<std::string, std::vector<float>>> embeddings;

  static MockScript from_json(const nlohmann::json& j);
};

// Deterministic backend: identical request sequences produce identical
// response sequences.
class MockBackend : public LlmBackend {
 public:
  explicit MockBackend(MockScript script);

  BackendKind kind() const override { return BackendKind::mock; }
  std::string complete(const ChatRequest& request) override;
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;

  std::size_t call_count() const;

  // Unit vector derived from FNV-1a of the text; stable across runs.
  static EmbeddingVector hash_embedding(std::string_view text, std::size_t dim);

 private:
  struct CompiledRule {
    MockRule rule;
    std::regex regex;
    std::size_t served = 0;
    int failures = 0;
  };

  MockScript script_;
  std::vector<CompiledRule> rules_;
  mutable std::mutex mutex_;
  std::size_t calls_ = 0;
};

}  // namespace kgrag
