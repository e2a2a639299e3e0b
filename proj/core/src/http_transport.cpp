#include <chrono>
#include <string>

#include <httplib.h>

#include "eot/error.hpp"
#include "eot/inference.hpp"

namespace eot {
namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw Error(ErrorCode::kInvalidArgument, "not an absolute URL: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::optional<std::chrono::seconds> retry_after(const httplib::Response& res) {
  if (!res.has_header("Retry-After")) return std::nullopt;
  const std::string value = res.get_header_value("Retry-After");
  long long seconds = 0;
  for (char c : value) {
    if (c < '0' || c > '9') return std::nullopt;  // HTTP-date form is not used by chat APIs
    seconds = seconds * 10 + (c - '0');
    if (seconds > 86400) return std::chrono::seconds(86400);
  }
  if (value.empty()) return std::nullopt;
  return std::chrono::seconds(seconds);
}

class HttplibTransport final : public HttpTransport {
 public:
  HttpResponse post(const HttpRequest& request) override {
    const SplitUrl url = split_url(request.url);
    httplib::Client client(url.origin);
    client.set_connection_timeout(request.timeout);
    client.set_read_timeout(request.timeout);
    client.set_write_timeout(request.timeout);

    httplib::Headers headers;
    std::string content_type = "application/json";
    for (const auto& [k, v] : request.headers) {
      if (k == "Content-Type") content_type = v;
      else headers.emplace(k, v);
    }

    const auto started = std::chrono::steady_clock::now();
    auto result = client.Post(url.path, headers, request.body, content_type);
    HttpResponse out;
    if (!result) {
      const auto elapsed = std::chrono::steady_clock::now() - started;
      const auto err = result.error();
      // A read that fails once the deadline has passed is the read timeout.
      const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                             ((err == httplib::Error::Read || err == httplib::Error::Write) &&
                              elapsed >= request.timeout * 9 / 10);
      out.transport = timed_out ? TransportStatus::kTimeout : TransportStatus::kConnectionError;
      out.error = httplib::to_string(err);
      return out;
    }
    out.status = result->status;
    out.body = result->body;
    out.retry_after = retry_after(*result);
    return out;
  }
};

}  // namespace

std::shared_ptr<HttpTransport> make_http_transport() {
  return std::make_shared<HttplibTransport>();
}

}  // namespace eot
