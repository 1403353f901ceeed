#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <string>

#include "vsr/protocol.hpp"

namespace vsr {

/// The video model. Implementations must be safe to call concurrently.
class VideoModel {
 public:
  virtual ~VideoModel() = default;
  virtual VideoQAResponse video_qa(const VideoQARequest& req) = 0;
};

/// The text-only language model. Implementations must be safe to call concurrently.
class TextModel {
 public:
  virtual ~TextModel() = default;
  virtual TextLMResponse complete(const TextLMRequest& req) = 0;
};

struct HttpSettings {
  int timeout_ms = 30000;
  int retries = 3;       // extra attempts after the first
  int backoff_ms = 100;  // delay before retry r is backoff_ms * 2^r
};

/// POSTs to `<endpoint>/v1/video_qa` and `<endpoint>/v1/text_lm`.
///
/// Transport failures are retried with exponential backoff and surface as
/// TransportError once retries are exhausted. Non-2xx replies become
/// BackendError (the body's error kind is preserved); malformed bodies are
/// ProtocolError. Neither of those is retried.
class HttpBackend final : public VideoModel, public TextModel {
 public:
  HttpBackend(std::string endpoint, HttpSettings settings);
  ~HttpBackend() override;

  VideoQAResponse video_qa(const VideoQARequest& req) override;
  TextLMResponse complete(const TextLMRequest& req) override;

  const std::string& endpoint() const { return endpoint_; }

 private:
  nlohmann::json post(const std::string& path, const nlohmann::json& body);

  std::string endpoint_;
  HttpSettings settings_;
};

struct CallCounts {
  std::int64_t video = 0;
  std::int64_t text = 0;
};

/// Forwards to another model and counts calls, including failed ones.
class CountingVideoModel final : public VideoModel {
 public:
  explicit CountingVideoModel(VideoModel& inner) : inner_(inner) {}
  VideoQAResponse video_qa(const VideoQARequest& req) override;
  std::int64_t calls() const { return calls_.load(); }

 private:
  VideoModel& inner_;
  std::atomic<std::int64_t> calls_{0};
};

class CountingTextModel final : public TextModel {
 public:
  explicit CountingTextModel(TextModel& inner) : inner_(inner) {}
  TextLMResponse complete(const TextLMRequest& req) override;
  std::int64_t calls() const { return calls_.load(); }

 private:
  TextModel& inner_;
  std::atomic<std::int64_t> calls_{0};
};

}  // namespace vsr
