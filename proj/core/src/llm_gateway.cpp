#include "kgrag/llm_gateway.hpp"

#include <thread>

#include "kgrag/text.hpp"

namespace kgrag {

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::http:
      return "http";
    case BackendKind::mock:
      return "mock";
    case BackendKind::custom:
      return "custom";
  }
  return "custom";
}

std::string_view to_string(GatewayError::Kind kind) {
  switch (kind) {
    case GatewayError::Kind::transport:
      return "transport";
    case GatewayError::Kind::protocol:
      return "protocol";
    case GatewayError::Kind::exhausted:
      return "exhausted";
  }
  return "protocol";
}

InFlightLimiter::InFlightLimiter(int limit) : limit_(limit < 1 ? 1 : limit) {}

void InFlightLimiter::acquire() {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [this] { return active_ < limit_; });
  ++active_;
}

void InFlightLimiter::release() {
  {
    std::lock_guard lock(mutex_);
    --active_;
  }
  cv_.notify_one();
}

InFlightLimiter::Permit::Permit(InFlightLimiter& owner) : owner_(owner) { owner_.acquire(); }
InFlightLimiter::Permit::~Permit() { owner_.release(); }

LlmGateway::LlmGateway(std::unique_ptr<LlmBackend> backend, GatewaySettings settings)
    : backend_(std::move(backend)),
      settings_(std::move(settings)),
      limiter_(settings_.max_in_flight) {
  if (!backend_) throw ConfigError("gateway needs a backend");
  if (settings_.temperature < 0) throw ConfigError("temperature must be >= 0");
  if (settings_.max_retries < 0) throw ConfigError("max_retries must be >= 0");
}

template <typename Fn>
auto LlmGateway::with_retries(Fn&& fn, int* attempts) {
  const int max_attempts = settings_.max_retries + 1;
  std::string last_error;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    *attempts = attempt;
    try {
      InFlightLimiter::Permit permit(limiter_);
      return fn();
    } catch (const GatewayError& e) {
      if (e.kind() != GatewayError::Kind::transport) throw;
      last_error = e.what();
    }
    if (attempt < max_attempts && settings_.backoff_initial_ms > 0) {
      const auto delay = std::chrono::milliseconds(
          static_cast<std::int64_t>(settings_.backoff_initial_ms) << (attempt - 1));
      std::this_thread::sleep_for(delay);
    }
  }
  throw GatewayError(GatewayError::Kind::exhausted,
                     "gave up after " + std::to_string(max_attempts) +
                         " attempts: " + last_error);
}

ChatResponse LlmGateway::chat(ChatRequest request) {
  if (!request.temperature) request.temperature = settings_.temperature;
  if (*request.temperature < 0) throw ConfigError("temperature must be >= 0");
  if (request.model_id.empty()) request.model_id = settings_.model_id;

  const auto start = std::chrono::steady_clock::now();
  ChatResponse response;
  response.backend = backend_->kind();
  response.text = with_retries([&] { return backend_->complete(request); },
                               &response.attempt_count);
  if (request.max_output_chars > 0)
    response.text = std::string(utf8_prefix(response.text, request.max_output_chars));
  response.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - start)
                            .count();
  return response;
}

std::vector<EmbeddingVector> LlmGateway::embed(std::span<const std::string> texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  const std::size_t batch = settings_.embed_batch_size == 0 ? texts.size()
                                                            : settings_.embed_batch_size;
  for (std::size_t begin = 0; begin < texts.size(); begin += batch) {
    auto chunk = texts.subspan(begin, std::min(batch, texts.size() - begin));
    int attempts = 0;
    auto vectors = with_retries([&] { return backend_->embed(chunk); }, &attempts);
    if (vectors.size() != chunk.size())
      throw GatewayError(GatewayError::Kind::protocol, "embedding count mismatch");
    for (auto& v : vectors) {
      if (!out.empty() && v.dim() != out.front().dim())
        throw GatewayError(GatewayError::Kind::protocol, "embedding dimension mismatch");
      out.push_back(std::move(v));
    }
  }
  return out;
}

}  // namespace kgrag
