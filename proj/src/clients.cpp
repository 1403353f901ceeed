#include "vsr/clients.hpp"

#include <thread>

#include <httplib.h>

#include "vsr/errors.hpp"

namespace vsr {

using nlohmann::json;

HttpBackend::HttpBackend(std::string endpoint, HttpSettings settings)
    : endpoint_(std::move(endpoint)), settings_(settings) {
  while (!endpoint_.empty() && endpoint_.back() == '/') endpoint_.pop_back();
  if (endpoint_.empty()) throw ConfigError("empty backend endpoint");
  if (settings_.retries < 0 || settings_.timeout_ms <= 0 || settings_.backoff_ms < 0)
    throw ConfigError("backend timeout must be positive; retries and backoff non-negative");
}

HttpBackend::~HttpBackend() = default;

json HttpBackend::post(const std::string& path, const json& body) {
  const std::string payload = body.dump();
  const int attempts = settings_.retries + 1;
  std::string last_error;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(
          static_cast<std::int64_t>(settings_.backoff_ms) << std::min(attempt - 1, 20)));
    }
    // One client per call keeps the backend shareable across threads.
    httplib::Client client(endpoint_);
    const auto timeout = std::chrono::milliseconds(settings_.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    auto res = client.Post(path, payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    json parsed;
    try {
      parsed = json::parse(res->body);
    } catch (const json::parse_error& e) {
      if (res->status / 100 != 2)
        throw BackendError("HTTP" + std::to_string(res->status), endpoint_ + path + ": " + res->body);
      throw ProtocolError(endpoint_ + path + ": malformed JSON: " + e.what());
    }
    if (res->status / 100 != 2) {
      std::string kind = "HTTP" + std::to_string(res->status);
      std::string message = res->body;
      if (auto it = parsed.find("error"); it != parsed.end() && it->is_object()) {
        kind = it->value("kind", kind);
        message = it->value("message", message);
      }
      throw BackendError(kind, endpoint_ + path + ": " + message);
    }
    return parsed;
  }
  throw TransportError(endpoint_ + path + ": " + last_error + " after " + std::to_string(attempts) +
                           " attempt(s)",
                       attempts);
}

VideoQAResponse HttpBackend::video_qa(const VideoQARequest& req) {
  req.validate();
  auto resp = video_response_from_json(post("/v1/video_qa", to_json(req)));
  if (req.want_logits && req.task == VideoTask::Answer) {
    for (std::size_t i = 0; i < req.options.size(); ++i)
      if (!resp.option_logits.contains(OptionLabel(static_cast<int>(i))))
        throw ProtocolError("option_logits does not cover option " + OptionLabel(static_cast<int>(i)).str());
  }
  return resp;
}

TextLMResponse HttpBackend::complete(const TextLMRequest& req) {
  return text_response_from_json(post("/v1/text_lm", to_json(req)));
}

VideoQAResponse CountingVideoModel::video_qa(const VideoQARequest& req) {
  calls_.fetch_add(1);
  return inner_.video_qa(req);
}

TextLMResponse CountingTextModel::complete(const TextLMRequest& req) {
  calls_.fetch_add(1);
  return inner_.complete(req);
}

}  // namespace vsr
