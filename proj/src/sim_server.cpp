#include <httplib.h>

#include "vsr/errors.hpp"
#include "vsr/log.hpp"
#include "vsr/sim_backend.hpp"

namespace vsr::sim {

using nlohmann::json;

struct SimServer::Impl {
  httplib::Server server;
};

namespace {

int status_for(const Error& e) {
  const auto& k = e.kind();
  if (k == "UnknownVideo" || k == "UnknownQuestion") return 404;
  return 400;
}

void reply_error(httplib::Response& res, int status, const std::string& kind, const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", {{"kind", kind}, {"message", message}}}}.dump(), "application/json");
}

}  // namespace

SimServer::SimServer(std::shared_ptr<const World> world) : world_(std::move(world)), impl_(std::make_unique<Impl>()) {
  install_routes();
}

SimServer::~SimServer() { stop(); }

void SimServer::install_routes() {
  auto handle = [this](std::atomic<std::int64_t>& counter, auto&& fn) {
    return [this, &counter, fn](const httplib::Request& req, httplib::Response& res) {
      const auto n = counter.fetch_add(1) + 1;
      if (n % 1000 == 0)
        log::info("simserve: " + std::to_string(video_requests()) + " video_qa, " + std::to_string(text_requests()) +
                  " text_lm requests");
      try {
        json body;
        try {
          body = json::parse(req.body);
        } catch (const json::parse_error& e) {
          throw ProtocolError(std::string("malformed JSON: ") + e.what());
        }
        res.set_content(fn(body).dump(), "application/json");
      } catch (const Error& e) {
        failed_requests_.fetch_add(1);
        reply_error(res, status_for(e), e.kind(), e.what());
      } catch (const std::exception& e) {
        failed_requests_.fetch_add(1);
        reply_error(res, 500, "InternalError", e.what());
      }
    };
  };
  impl_->server.Post("/v1/video_qa", handle(video_requests_, [this](const json& body) {
                       return to_json(sim_video_qa(video_request_from_json(body), *world_));
                     }));
  impl_->server.Post("/v1/text_lm", handle(text_requests_, [this](const json& body) {
                       return to_json(sim_text_lm(text_request_from_json(body), *world_));
                     }));
}

int SimServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw IoError("cannot bind " + host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    throw IoError("cannot bind " + host + ":" + std::to_string(port) + " (port in use?)");
  }
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void SimServer::listen_blocking(const std::string& host, int port) {
  if (!impl_->server.bind_to_port(host, port))
    throw IoError("cannot bind " + host + ":" + std::to_string(port) + " (port in use?)");
  impl_->server.listen_after_bind();
}

void SimServer::stop() {
  if (impl_) impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace vsr::sim
