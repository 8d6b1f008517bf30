#pragma once

#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "masr/backends/interfaces.hpp"
#include "masr/backends/mock.hpp"

namespace masr {

struct BackendConfig {
  std::string chat_endpoint = "http://127.0.0.1:8000/v1";
  std::string caption_endpoint = "http://127.0.0.1:8000/v1";
  std::string embed_endpoint = "http://127.0.0.1:8000/v1";
  std::string chat_model = "gpt-4";
  std::string caption_model = "qwen2-vl-7b-instruct";
  std::string embed_model = "eva-clip-8b";
  std::string api_key_env = "MASR_API_KEY";  // empty: send no Authorization header
  double timeout_s = 60.0;
  int max_retries = 3;
  int backoff_base_ms = 250;
  int backoff_max_ms = 8000;
  std::uint64_t jitter_seed = 0;
  std::optional<std::string> cache_dir;  // enables the content-addressed cache

  void validate() const;  // throws ConfigError with the offending field
  bool operator==(const BackendConfig&) const = default;
};

void to_json(nlohmann::json& j, const BackendConfig& c);
// Missing fields keep their defaults; type errors become ConfigError naming
// "backends.<field>".
void from_json(const nlohmann::json& j, BackendConfig& c);

struct BackendSet {
  std::shared_ptr<ChatBackend> chat;
  std::shared_ptr<Captioner> captioner;
  std::shared_ptr<Encoder> encoder;
};

// Resolves the API key from the environment (MissingApiKey names the
// variable when it is unset) and wires HTTP clients, wrapped in the cache
// when cache_dir is configured.
BackendSet make_http_backends(const BackendConfig& config);

// Mock encoder/captioner/reflector over shared tables; cache optional.
BackendSet make_mock_backends(std::shared_ptr<const MockTables> tables,
                              const std::optional<std::string>& cache_dir = std::nullopt);

}  // namespace masr
