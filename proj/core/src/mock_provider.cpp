#include "eot/mock_provider.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "eot/error.hpp"
#include "json_records.hpp"

namespace eot {

using detail::json;
using detail::ojson;

struct MockProvider::Impl {
  Handler handler;
  httplib::Server server;
  std::string host;
  int port = 0;
  std::thread thread;

  mutable std::mutex mutex;
  std::vector<MockRequest> log;
  std::size_t calls = 0;
  std::size_t in_flight = 0;
  std::size_t peak = 0;

  void serve(const httplib::Request& req, httplib::Response& res) {
    MockRequest request;
    request.path = req.path;
    request.authorization = req.get_header_value("Authorization");
    request.body = req.body;
    const json doc = json::parse(req.body, nullptr, false);
    if (doc.is_object()) {
      if (auto m = doc.find("model"); m != doc.end() && m->is_string()) request.model = m->get<std::string>();
      if (auto ms = doc.find("messages"); ms != doc.end() && ms->is_array()) {
        for (const auto& m : *ms) {
          if (!m.is_object()) continue;
          request.messages.push_back({m.value("role", ""), m.value("content", "")});
        }
      }
    }

    std::size_t index = 0;
    {
      std::lock_guard lock(mutex);
      index = calls++;
      log.push_back(request);
      peak = std::max(peak, ++in_flight);
    }
    MockReply reply;
    try {
      reply = handler(request, index);
    } catch (const std::exception& e) {
      reply.status = 500;
      reply.raw_body = std::string(R"({"error":"mock handler failed"})");
    }
    if (reply.delay.count() > 0) std::this_thread::sleep_for(reply.delay);
    {
      std::lock_guard lock(mutex);
      --in_flight;
    }

    res.status = reply.status;
    if (reply.retry_after_seconds) res.set_header("Retry-After", std::to_string(*reply.retry_after_seconds));
    if (reply.raw_body) {
      res.set_content(*reply.raw_body, "application/json");
      return;
    }
    if (reply.status >= 200 && reply.status < 300) {
      ojson body{{"id", "mock-" + std::to_string(index)},
                 {"object", "chat.completion"},
                 {"model", request.model},
                 {"choices", ojson::array({ojson{{"index", 0},
                                                 {"message", ojson{{"role", "assistant"}, {"content", reply.content}}},
                                                 {"finish_reason", "stop"}}})}};
      res.set_content(detail::dump_line(body), "application/json");
    } else {
      ojson body{{"error", ojson{{"message", reply.content.empty() ? "mock error" : reply.content},
                                 {"code", reply.status}}}};
      res.set_content(detail::dump_line(body), "application/json");
    }
  }
};

MockProvider::MockProvider(Handler handler, const std::string& host, int port)
    : impl_(std::make_unique<Impl>()) {
  impl_->handler = std::move(handler);
  impl_->host = host;
  impl_->server.new_task_queue = [] { return new httplib::ThreadPool(32); };
  impl_->server.Post(R"(.*/chat/completions)",
                     [impl = impl_.get()](const httplib::Request& req, httplib::Response& res) {
                       impl->serve(req, res);
                     });
  if (port == 0) {
    impl_->port = impl_->server.bind_to_any_port(host);
  } else {
    impl_->port = impl_->server.bind_to_port(host, port) ? port : -1;
  }
  if (impl_->port <= 0)
    throw Error(ErrorCode::kIo, "mock provider cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([impl = impl_.get()] { impl->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

MockProvider::~MockProvider() {
  stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int MockProvider::port() const noexcept { return impl_->port; }

std::string MockProvider::base_url() const {
  return "http://" + impl_->host + ":" + std::to_string(impl_->port) + "/v1";
}

std::size_t MockProvider::request_count() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->calls;
}

std::size_t MockProvider::max_in_flight() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->peak;
}

std::vector<MockRequest> MockProvider::requests() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->log;
}

void MockProvider::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

void MockProvider::stop() { impl_->server.stop(); }

MockProvider::Handler scripted_handler(std::vector<std::pair<std::string, MockReply>> replies) {
  // Longest first, so a review whose text contains another review's text
  // still gets its own reply.
  std::stable_sort(replies.begin(), replies.end(),
                   [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
  return [replies = std::move(replies)](const MockRequest& request, std::size_t) {
    std::string_view prompt;
    for (const auto& m : request.messages)
      if (m.role == "user") prompt = m.content;
    for (const auto& [text, reply] : replies)
      if (!text.empty() && prompt.find(text) != std::string_view::npos) return reply;
    MockReply miss;
    miss.status = 404;
    miss.content = "no scripted reply for this review";
    return miss;
  };
}

std::string gold_echo_response(const GoldRecord& gold) {
  return detail::dump_line(ojson{{"emotions", detail::emotions_to_json(gold.output)}});
}

}  // namespace eot
