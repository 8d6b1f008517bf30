#include "masr/backends/config.hpp"

#include <cstdlib>

#include "masr/backends/cache.hpp"
#include "masr/backends/http.hpp"
#include "masr/errors.hpp"

namespace masr {

void BackendConfig::validate() const {
  if (!(timeout_s > 0.0)) throw Error(ErrorKind::ConfigError, "backends.timeout_s: must be > 0");
  if (max_retries < 0) throw Error(ErrorKind::ConfigError, "backends.max_retries: must be >= 0");
  if (backoff_base_ms < 0) throw Error(ErrorKind::ConfigError, "backends.backoff_base_ms: must be >= 0");
  if (backoff_max_ms < backoff_base_ms) {
    throw Error(ErrorKind::ConfigError, "backends.backoff_max_ms: must be >= backoff_base_ms");
  }
  for (const auto* e : {&chat_endpoint, &caption_endpoint, &embed_endpoint}) {
    if (e->find("://") == std::string::npos) {
      throw Error(ErrorKind::ConfigError, "backends endpoint '" + *e + "' lacks a scheme");
    }
  }
}

void to_json(nlohmann::json& j, const BackendConfig& c) {
  j = nlohmann::json{{"chat_endpoint", c.chat_endpoint},
                     {"caption_endpoint", c.caption_endpoint},
                     {"embed_endpoint", c.embed_endpoint},
                     {"chat_model", c.chat_model},
                     {"caption_model", c.caption_model},
                     {"embed_model", c.embed_model},
                     {"api_key_env", c.api_key_env},
                     {"timeout_s", c.timeout_s},
                     {"max_retries", c.max_retries},
                     {"backoff_base_ms", c.backoff_base_ms},
                     {"backoff_max_ms", c.backoff_max_ms},
                     {"jitter_seed", c.jitter_seed}};
  j["cache_dir"] = c.cache_dir ? nlohmann::json(*c.cache_dir) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, BackendConfig& c) {
  const auto field = [&](const char* name, auto& slot) {
    const auto it = j.find(name);
    if (it == j.end() || it->is_null()) return;
    try {
      it->get_to(slot);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::ConfigError, std::string("backends.") + name + ": " + e.what());
    }
  };
  field("chat_endpoint", c.chat_endpoint);
  field("caption_endpoint", c.caption_endpoint);
  field("embed_endpoint", c.embed_endpoint);
  field("chat_model", c.chat_model);
  field("caption_model", c.caption_model);
  field("embed_model", c.embed_model);
  field("api_key_env", c.api_key_env);
  field("timeout_s", c.timeout_s);
  field("max_retries", c.max_retries);
  field("backoff_base_ms", c.backoff_base_ms);
  field("backoff_max_ms", c.backoff_max_ms);
  field("jitter_seed", c.jitter_seed);
  if (auto it = j.find("cache_dir"); it != j.end()) {
    if (it->is_null()) {
      c.cache_dir.reset();
    } else if (it->is_string()) {
      c.cache_dir = it->get<std::string>();
    } else {
      throw Error(ErrorKind::ConfigError, "backends.cache_dir: must be a string or null");
    }
  }
}

BackendSet make_http_backends(const BackendConfig& config) {
  config.validate();
  std::optional<std::string> key;
  if (!config.api_key_env.empty()) {
    const char* value = std::getenv(config.api_key_env.c_str());
    if (value == nullptr || *value == '\0') {
      throw Error(ErrorKind::MissingApiKey,
                  "environment variable " + config.api_key_env + " is not set (needed without --mock)");
    }
    key = value;
  }
  const RetryPolicy policy{config.max_retries, config.backoff_base_ms, config.backoff_max_ms, config.jitter_seed};
  const auto transport = [&](const std::string& endpoint) {
    return std::make_shared<HttpTransport>(endpoint, key, config.timeout_s, policy);
  };

  BackendSet set;
  set.chat = std::make_shared<HttpChatBackend>(transport(config.chat_endpoint), config.chat_model);
  std::shared_ptr<Captioner> captioner =
      std::make_shared<HttpCaptioner>(transport(config.caption_endpoint), config.caption_model);
  std::shared_ptr<Encoder> encoder = std::make_shared<HttpEncoder>(transport(config.embed_endpoint), config.embed_model);
  if (config.cache_dir) {
    auto cache = std::make_shared<ContentCache>(*config.cache_dir);
    captioner = std::make_shared<CachedCaptioner>(captioner, cache);
    encoder = std::make_shared<CachedEncoder>(encoder, cache);
  }
  set.captioner = std::move(captioner);
  set.encoder = std::move(encoder);
  return set;
}

BackendSet make_mock_backends(std::shared_ptr<const MockTables> tables, const std::optional<std::string>& cache_dir) {
  BackendSet set;
  set.chat = std::make_shared<MockReflector>(tables);
  std::shared_ptr<Captioner> captioner = std::make_shared<MockCaptioner>(tables);
  std::shared_ptr<Encoder> encoder = std::make_shared<MockEncoder>(tables);
  if (cache_dir) {
    auto cache = std::make_shared<ContentCache>(*cache_dir);
    captioner = std::make_shared<CachedCaptioner>(captioner, cache);
    encoder = std::make_shared<CachedEncoder>(encoder, cache);
  }
  set.captioner = std::move(captioner);
  set.encoder = std::move(encoder);
  return set;
}

}  // namespace masr
