#pragma once

// A local HTTP server speaking the chat-completion protocol, for tests and
// offline demos.

#include <chrono>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eot/annotation.hpp"
#include "eot/prompting.hpp"

namespace eot {

struct MockRequest {
  std::string path;
  std::string authorization;
  std::string body;
  std::string model;
  std::vector<ChatMessage> messages;
};

struct MockReply {
  int status = 200;
  std::string content;                  // wrapped as choices[0].message.content
  std::optional<std::string> raw_body;  // sent verbatim instead when set
  std::chrono::milliseconds delay{0};
  std::optional<int> retry_after_seconds;
};

class MockProvider {
 public:
  /// `call_index` counts requests from zero across the server's lifetime.
  using Handler = std::function<MockReply(const MockRequest& request, std::size_t call_index)>;

  /// Binds `host:port` (port 0 picks a free port) and serves on a
  /// background thread until destroyed.
  explicit MockProvider(Handler handler, const std::string& host = "127.0.0.1", int port = 0);
  ~MockProvider();
  MockProvider(const MockProvider&) = delete;
  MockProvider& operator=(const MockProvider&) = delete;

  int port() const noexcept;
  /// `http://host:port/v1`
  std::string base_url() const;

  std::size_t request_count() const;
  std::size_t max_in_flight() const;
  std::vector<MockRequest> requests() const;

  /// Blocks until the server stops.
  void wait();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Finds the review whose text appears in the last user message (longest
/// text wins) and replies with its scripted reply; unknown prompts get 404.
MockProvider::Handler scripted_handler(std::vector<std::pair<std::string, MockReply>> replies_by_review_text);

/// `{"emotions": [...]}` for a gold record, the response a perfect model
/// would give.
std::string gold_echo_response(const GoldRecord& gold);

}  // namespace eot
