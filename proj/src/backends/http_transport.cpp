#include <httplib.h>

#include <chrono>
#include <cmath>
#include <thread>

#include "masr/backends/http.hpp"
#include "masr/errors.hpp"

namespace masr {
namespace {

struct SplitUrl {
  std::string origin;
  std::string prefix;
};

SplitUrl split_endpoint(const std::string& endpoint) {
  const auto scheme = endpoint.find("://");
  if (scheme == std::string::npos) {
    throw Error(ErrorKind::ConfigError, "endpoint '" + endpoint + "' lacks a scheme (http:// or https://)");
  }
  const auto slash = endpoint.find('/', scheme + 3);
  SplitUrl out;
  out.origin = endpoint.substr(0, slash);
  out.prefix = slash == std::string::npos ? "" : endpoint.substr(slash);
  while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  return out;
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

void set_timeout(httplib::Client& cli, double timeout_s) {
  const auto sec = static_cast<time_t>(timeout_s);
  const auto usec = static_cast<time_t>((timeout_s - static_cast<double>(sec)) * 1e6);
  cli.set_connection_timeout(sec, usec);
  cli.set_read_timeout(sec, usec);
  cli.set_write_timeout(sec, usec);
}

}  // namespace

HttpTransport::HttpTransport(const std::string& endpoint, std::optional<std::string> api_key, double timeout_s,
                             RetryPolicy policy)
    : endpoint_(endpoint),
      api_key_(std::move(api_key)),
      timeout_s_(timeout_s),
      policy_(policy),
      jitter_rng_(policy.jitter_seed) {
  if (!(timeout_s > 0.0)) throw Error(ErrorKind::ConfigError, "timeout_s must be > 0");
  if (policy.max_retries < 0) throw Error(ErrorKind::ConfigError, "max_retries must be >= 0");
  auto split = split_endpoint(endpoint);
  origin_ = std::move(split.origin);
  path_prefix_ = std::move(split.prefix);
}

int HttpTransport::backoff_delay_ms(int retry) {
  const double exp = static_cast<double>(policy_.backoff_base_ms) * std::pow(2.0, retry - 1);
  const int capped = static_cast<int>(std::min<double>(exp, policy_.backoff_max_ms));
  if (policy_.backoff_base_ms <= 0) return capped;
  std::lock_guard lock(rng_mu_);
  std::uniform_int_distribution<int> jitter(0, policy_.backoff_base_ms);
  return capped + jitter(jitter_rng_);
}

nlohmann::json HttpTransport::post_json(const std::string& route, const nlohmann::json& body) {
  const std::string path = path_prefix_ + route;
  const std::string payload = body.dump();
  httplib::Headers headers;
  if (api_key_) headers.emplace("Authorization", "Bearer " + *api_key_);

  std::string last_failure;
  for (int attempt = 0; attempt <= policy_.max_retries; ++attempt) {
    if (attempt > 0) {
      ++retries_;
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff_delay_ms(attempt)));
    }
    ++attempts_;
    // A fresh client per attempt keeps the transport safe under concurrent use.
    httplib::Client cli(origin_);
    set_timeout(cli, timeout_s_);
    auto res = cli.Post(path, headers, payload, "application/json");
    if (!res) {
      last_failure = "request to " + origin_ + path + " failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 200 && res->status < 300) {
      auto parsed = nlohmann::json::parse(res->body, nullptr, false);
      if (parsed.is_discarded()) {
        throw Error(ErrorKind::MalformedResponse, origin_ + path + " returned a non-JSON body");
      }
      return parsed;
    }
    if (!retryable_status(res->status)) {
      throw StatusError(res->status, origin_ + path + " returned HTTP " + std::to_string(res->status));
    }
    last_failure = origin_ + path + " returned HTTP " + std::to_string(res->status);
  }
  throw Error(ErrorKind::Transport,
              "giving up after " + std::to_string(policy_.max_retries + 1) + " attempts: " + last_failure);
}

}  // namespace masr
