#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>

#include "shg/prompt.hpp"

namespace shg {

enum class ModelMode { standard, reasoning };
enum class ReasoningEffort { minimal, low, medium, high };

std::string to_string(ModelMode m);
std::string to_string(ReasoningEffort e);

struct RetryPolicy {
  int max_attempts = 3;  // bounded at 10
  std::chrono::milliseconds base_backoff{250};
  double backoff_multiplier = 2.0;
  bool retry_on_timeout = true;
  bool retry_on_429 = true;
  bool retry_on_5xx = true;
};

struct ModelConfig {
  std::string label;
  std::string endpoint_url;  // base URL, e.g. https://host/api/v1
  std::string model_slug;
  ModelMode mode = ModelMode::standard;
  std::optional<ReasoningEffort> reasoning_effort;
  std::optional<bool> thinking_enabled;  // hybrid models
  std::optional<double> temperature;     // omitted from requests unless set
  int max_output_tokens = 4096;
  int max_in_flight = 2;
  RetryPolicy retry;
  std::string api_key_env = "SHG_API_KEY";
};

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

struct CompletionResponse {
  std::string text;
  std::string finish_reason;
  TokenUsage usage;
  std::chrono::milliseconds latency{0};
  int attempt_count = 1;
  std::string raw_request_json;   // archived for auditability
  std::string raw_response_json;
};

struct HealthReport {
  bool reachable = false;
  bool auth_ok = false;
  bool model_available = false;
  std::string detail;

  bool healthy() const { return reachable && auth_ok && model_available; }
};

class GatewayError : public std::runtime_error {
 public:
  enum class Kind {
    auth,               // bad or rejected credential; never retried
    model_unavailable,  // unknown slug
    context_length,     // prompt rejected as too long
    missing_content,    // 200 but no assistant text
    exhausted_retries,  // transient failures beyond max_attempts
    network,            // unreachable / transport failure
    protocol,           // unparseable response body
  };

  GatewayError(Kind kind, const std::string& what, int attempts = 1)
      : std::runtime_error(what), kind_(kind), attempts_(attempts) {}

  Kind kind() const { return kind_; }
  int attempts() const { return attempts_; }
  static std::string kind_name(Kind k);

 private:
  Kind kind_;
  int attempts_;
};

// Anything that can serve chat completions; tests substitute mocks.
class CompletionClient {
 public:
  virtual ~CompletionClient() = default;
  virtual CompletionResponse complete(const ModelConfig& config,
                                      const MessageSequence& messages) = 0;
  virtual HealthReport probe(const ModelConfig& config) = 0;
};

// Blocking token bucket of size max_in_flight per model label.
class InFlightLimiter {
 public:
  class Guard {
   public:
    Guard(InFlightLimiter& limiter, const std::string& label)
        : limiter_(limiter), label_(label) {}
    ~Guard() { limiter_.release(label_); }
    Guard(const Guard&) = delete;
    Guard& operator=(const Guard&) = delete;

   private:
    InFlightLimiter& limiter_;
    std::string label_;
  };

  void acquire(const std::string& label, int max_in_flight);
  void release(const std::string& label);

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::map<std::string, int> in_flight_;
};

// HTTP client for OpenAI-compatible /chat/completions endpoints.
class HttpGateway : public CompletionClient {
 public:
  CompletionResponse complete(const ModelConfig& config,
                              const MessageSequence& messages) override;
  HealthReport probe(const ModelConfig& config) override;

  // Request body serialization, exposed so tests can inspect payload shape.
  static std::string build_request_body(const ModelConfig& config,
                                        const MessageSequence& messages);

 private:
  InFlightLimiter limiter_;
};

}  // namespace shg
