#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <thread>

#include "vsr/clients.hpp"
#include "vsr/sim_world.hpp"

namespace vsr::sim {

/// Video-model replies of the simulated world. Pure: the same world and
/// request always produce the same response.
VideoQAResponse sim_video_qa(const VideoQARequest& req, const World& world);

/// Rule-based text-model replies for the shipped prompt templates.
/// Throws UnrecognizedPrompt for anything else.
TextLMResponse sim_text_lm(const TextLMRequest& req, const World& world);

/// In-process backend over a shared world.
class SimBackend final : public VideoModel, public TextModel {
 public:
  explicit SimBackend(std::shared_ptr<const World> world) : world_(std::move(world)) {}

  VideoQAResponse video_qa(const VideoQARequest& req) override { return sim_video_qa(req, *world_); }
  TextLMResponse complete(const TextLMRequest& req) override { return sim_text_lm(req, *world_); }

  const World& world() const { return *world_; }

 private:
  std::shared_ptr<const World> world_;
};

/// HTTP server speaking the backend wire protocol over the simulated world.
class SimServer {
 public:
  explicit SimServer(std::shared_ptr<const World> world);
  ~SimServer();

  SimServer(const SimServer&) = delete;
  SimServer& operator=(const SimServer&) = delete;

  /// Binds to host:port (port 0 picks a free port) and serves on a
  /// background thread. Returns the bound port. Throws IoError when binding fails.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  /// Blocks serving on the calling thread until stop() is called.
  void listen_blocking(const std::string& host, int port);
  void stop();

  std::int64_t video_requests() const { return video_requests_.load(); }
  std::int64_t text_requests() const { return text_requests_.load(); }
  std::int64_t failed_requests() const { return failed_requests_.load(); }

 private:
  struct Impl;
  void install_routes();

  std::shared_ptr<const World> world_;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  std::atomic<std::int64_t> video_requests_{0};
  std::atomic<std::int64_t> text_requests_{0};
  std::atomic<std::int64_t> failed_requests_{0};
};

}  // namespace vsr::sim
