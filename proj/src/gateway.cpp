#include "shg/gateway.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace shg {

using nlohmann::json;

namespace {

struct SplitUrl {
  std::string origin;       // scheme://host[:port]
  std::string path_prefix;  // remainder, no trailing slash
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw GatewayError(GatewayError::Kind::network, "endpoint URL missing scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  if (path_start == std::string::npos) {
    out.origin = url;
  } else {
    out.origin = url.substr(0, path_start);
    out.path_prefix = url.substr(path_start);
  }
  while (!out.path_prefix.empty() && out.path_prefix.back() == '/')
    out.path_prefix.pop_back();
  return out;
}

std::string bearer_token(const ModelConfig& config) {
  const char* token = std::getenv(config.api_key_env.c_str());
  return token ? token : "";
}

bool looks_like_context_error(const std::string& body) {
  return body.find("context_length") != std::string::npos ||
         body.find("context length") != std::string::npos ||
         body.find("maximum context") != std::string::npos;
}

bool looks_like_unknown_model(const std::string& body) {
  return body.find("model_not_found") != std::string::npos ||
         body.find("does not exist") != std::string::npos ||
         body.find("unknown model") != std::string::npos;
}

std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int attempt) {
  const double factor = std::pow(policy.backoff_multiplier, attempt - 1);
  return std::chrono::milliseconds(
      static_cast<std::int64_t>(static_cast<double>(policy.base_backoff.count()) * factor));
}

CompletionResponse parse_completion(const std::string& body, int attempts) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw GatewayError(GatewayError::Kind::protocol,
                       std::string("unparseable completion response: ") + e.what(), attempts);
  }
  CompletionResponse out;
  out.raw_response_json = body;
  out.attempt_count = attempts;
  if (!doc.contains("choices") || doc["choices"].empty())
    throw GatewayError(GatewayError::Kind::missing_content,
                       "response has no choices", attempts);
  const auto& choice = doc["choices"][0];
  if (!choice.contains("message") || !choice["message"].contains("content") ||
      choice["message"]["content"].is_null())
    throw GatewayError(GatewayError::Kind::missing_content,
                       "response missing assistant content", attempts);
  out.text = choice["message"]["content"].get<std::string>();
  out.finish_reason = choice.value("finish_reason", "");
  if (doc.contains("usage")) {
    out.usage.prompt_tokens = doc["usage"].value("prompt_tokens", 0);
    out.usage.completion_tokens = doc["usage"].value("completion_tokens", 0);
  }
  return out;
}

}  // namespace

std::string to_string(ModelMode m) {
  return m == ModelMode::reasoning ? "reasoning" : "standard";
}

std::string to_string(ReasoningEffort e) {
  switch (e) {
    case ReasoningEffort::minimal: return "minimal";
    case ReasoningEffort::low: return "low";
    case ReasoningEffort::medium: return "medium";
    case ReasoningEffort::high: return "high";
  }
  return "medium";
}

std::string GatewayError::kind_name(Kind k) {
  switch (k) {
    case Kind::auth: return "auth";
    case Kind::model_unavailable: return "model_unavailable";
    case Kind::context_length: return "context_length";
    case Kind::missing_content: return "missing_content";
    case Kind::exhausted_retries: return "exhausted_retries";
    case Kind::network: return "network";
    case Kind::protocol: return "protocol";
  }
  return "unknown";
}

void InFlightLimiter::acquire(const std::string& label, int max_in_flight) {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [&] { return in_flight_[label] < max_in_flight; });
  ++in_flight_[label];
}

void InFlightLimiter::release(const std::string& label) {
  {
    std::lock_guard lock(mutex_);
    --in_flight_[label];
  }
  cv_.notify_all();
}

std::string HttpGateway::build_request_body(const ModelConfig& config,
                                            const MessageSequence& messages) {
  json body;
  body["model"] = config.model_slug;
  body["messages"] = json::array();
  for (const auto& msg : messages.messages)
    body["messages"].push_back(
        {{"role", msg.role == MessageRole::system ? "system" : "user"},
         {"content", msg.content}});
  body["max_tokens"] = config.max_output_tokens;
  if (config.temperature) body["temperature"] = *config.temperature;

  // OpenRouter-style extension block; standard mode sends no effort field.
  json reasoning = json::object();
  if (config.mode == ModelMode::reasoning)
    reasoning["effort"] = to_string(config.reasoning_effort.value_or(ReasoningEffort::medium));
  if (config.thinking_enabled) reasoning["enabled"] = *config.thinking_enabled;
  if (!reasoning.empty()) body["reasoning"] = reasoning;

  return body.dump();
}

CompletionResponse HttpGateway::complete(const ModelConfig& config,
                                         const MessageSequence& messages) {
  if (config.retry.max_attempts < 1 || config.retry.max_attempts > 10)
    throw GatewayError(GatewayError::Kind::protocol, "retry.max_attempts must be in [1,10]");

  limiter_.acquire(config.label, config.max_in_flight);
  InFlightLimiter::Guard guard(limiter_, config.label);

  const SplitUrl url = split_url(config.endpoint_url);
  httplib::Client client(url.origin);
  client.set_connection_timeout(10, 0);
  client.set_read_timeout(600, 0);
  const std::string token = bearer_token(config);
  if (!token.empty()) client.set_bearer_token_auth(token);

  const std::string request_body = build_request_body(config, messages);
  const std::string path = url.path_prefix + "/chat/completions";
  const auto started = std::chrono::steady_clock::now();

  std::string last_failure;
  bool transport_failure = false;
  int attempts_made = 0;
  for (int attempt = 1; attempt <= config.retry.max_attempts; ++attempt) {
    attempts_made = attempt;
    auto result = client.Post(path, request_body, "application/json");
    if (!result) {
      last_failure = "transport error: " + httplib::to_string(result.error());
      transport_failure = true;
      if (!config.retry.retry_on_timeout || attempt == config.retry.max_attempts) break;
    } else {
      transport_failure = false;
      const int status = result->status;
      if (status == 200) {
        auto response = parse_completion(result->body, attempt);
        response.raw_request_json = request_body;
        response.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - started);
        return response;
      }
      if (status == 401 || status == 403)
        throw GatewayError(GatewayError::Kind::auth,
                           "authentication rejected (HTTP " + std::to_string(status) + ")",
                           attempt);
      if (status == 404 || looks_like_unknown_model(result->body))
        throw GatewayError(GatewayError::Kind::model_unavailable,
                           "model '" + config.model_slug + "' unavailable (HTTP " +
                               std::to_string(status) + ")",
                           attempt);
      if (looks_like_context_error(result->body))
        throw GatewayError(GatewayError::Kind::context_length,
                           "prompt rejected for context length", attempt);
      const bool retryable = (status == 429 && config.retry.retry_on_429) ||
                             (status >= 500 && config.retry.retry_on_5xx);
      last_failure = "HTTP " + std::to_string(status);
      if (!retryable || attempt == config.retry.max_attempts) {
        if (!retryable)
          throw GatewayError(GatewayError::Kind::protocol,
                             "unexpected status " + std::to_string(status), attempt);
        break;
      }
    }
    std::this_thread::sleep_for(backoff_delay(config.retry, attempt));
  }

  if (transport_failure && attempts_made == 1)
    throw GatewayError(GatewayError::Kind::network, last_failure, 1);
  throw GatewayError(GatewayError::Kind::exhausted_retries,
                     "gave up after " + std::to_string(attempts_made) +
                         " attempts; last failure: " + last_failure,
                     attempts_made);
}

HealthReport HttpGateway::probe(const ModelConfig& config) {
  HealthReport report;
  ModelConfig probe_config = config;
  probe_config.max_output_tokens = 8;
  probe_config.retry.max_attempts = 1;

  MessageSequence ping;
  ping.messages.push_back({MessageRole::system, "Health probe."});
  ping.messages.push_back({MessageRole::user, "Reply with OK."});

  try {
    complete(probe_config, ping);
    report.reachable = true;
    report.auth_ok = true;
    report.model_available = true;
    report.detail = "ok";
  } catch (const GatewayError& e) {
    report.detail = e.what();
    switch (e.kind()) {
      case GatewayError::Kind::auth:
        report.reachable = true;
        break;
      case GatewayError::Kind::model_unavailable:
        report.reachable = true;
        report.auth_ok = true;
        break;
      case GatewayError::Kind::network:
      case GatewayError::Kind::exhausted_retries:
        break;
      default:
        // Server answered something; endpoint exists even if the reply is odd.
        report.reachable = true;
        report.auth_ok = true;
        report.model_available = true;
        break;
    }
  }
  return report;
}

}  // namespace shg
