#ifndef CBT_HTTP_HPP
#define CBT_HTTP_HPP

// Minimal JSON-over-HTTP POST with bounded retries, shared by the remote
// classifier and the remote synonym provider.

#include <chrono>
#include <cstddef>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>

#include "cbt/error.hpp"

namespace cbt {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // always starts with '/'
};

/// Splits "http://host:port/some/path" into origin and path.
inline Endpoint parse_endpoint(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos)
    throw Error(ErrorCode::ConfigError, "endpoint needs a scheme: " + std::string(url));
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https")
    throw Error(ErrorCode::ConfigError, "unsupported scheme: " + std::string(scheme));
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint e;
  if (path_start == std::string_view::npos) {
    e.origin = std::string(url);
    e.path = "/";
  } else {
    e.origin = std::string(url.substr(0, path_start));
    e.path = std::string(url.substr(path_start));
  }
  if (e.origin.size() <= scheme_end + 3)
    throw Error(ErrorCode::ConfigError, "endpoint has no host: " + std::string(url));
  return e;
}

/// Joins a base path and a route without doubling slashes.
inline std::string join_path(std::string_view base, std::string_view route) {
  std::string out(base);
  while (!out.empty() && out.back() == '/') out.pop_back();
  if (route.empty() || route.front() != '/') out.push_back('/');
  out.append(route);
  return out;
}

struct HttpOptions {
  double timeout_s = 30.0;
  int retries = 2;
  int backoff_ms = 100;
  std::vector<std::pair<std::string, std::string>> headers;
};

/// POSTs a JSON body. Connection failures and 5xx responses are retried up
/// to `retries` extra times; anything else non-2xx fails immediately.
/// Throws BackendUnavailable when no 2xx response is obtained.
inline std::string post_json(const Endpoint& endpoint, const std::string& path,
                             const std::string& body, const HttpOptions& options) {
  httplib::Client client(endpoint.origin);
  const auto secs = static_cast<time_t>(options.timeout_s);
  const auto usecs = static_cast<time_t>((options.timeout_s - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  for (const auto& [k, v] : options.headers) headers.emplace(k, v);

  std::string last_failure = "no attempt";
  for (int attempt = 0; attempt <= options.retries; ++attempt) {
    if (attempt > 0 && options.backoff_ms > 0)
      std::this_thread::sleep_for(std::chrono::milliseconds(options.backoff_ms * attempt));
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      last_failure = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 200 && res->status < 300) return res->body;
    last_failure = "HTTP " + std::to_string(res->status);
    if (res->status < 500) break;
  }
  throw Error(ErrorCode::BackendUnavailable,
              endpoint.origin + path + " (" + last_failure + ")");
}

}  // namespace cbt

#endif  // CBT_HTTP_HPP
