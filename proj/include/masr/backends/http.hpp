#pragma once

// JSON-over-HTTP clients for chat-completions and embeddings style servers.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "masr/backends/interfaces.hpp"
#include "masr/errors.hpp"

namespace masr {

struct RetryPolicy {
  int max_retries = 3;
  int backoff_base_ms = 250;
  int backoff_max_ms = 8000;
  std::uint64_t jitter_seed = 0;
};

// POSTs JSON to {endpoint}{route}. Retries connection failures, timeouts,
// 429 and 5xx with exponential backoff plus jitter, making at most
// 1 + max_retries attempts per call. Other non-2xx statuses raise
// StatusError without retrying; exhausted retries raise Transport.
class HttpTransport {
 public:
  HttpTransport(const std::string& endpoint, std::optional<std::string> api_key, double timeout_s,
                RetryPolicy policy);

  nlohmann::json post_json(const std::string& route, const nlohmann::json& body);

  std::uint64_t attempts() const { return attempts_.load(); }
  std::uint64_t retries() const { return retries_.load(); }
  const std::string& endpoint() const { return endpoint_; }

 private:
  int backoff_delay_ms(int retry);

  std::string endpoint_;
  std::string origin_;       // scheme://host[:port]
  std::string path_prefix_;  // e.g. "/v1"
  std::optional<std::string> api_key_;
  double timeout_s_;
  RetryPolicy policy_;
  std::mutex rng_mu_;
  std::mt19937_64 jitter_rng_;
  std::atomic<std::uint64_t> attempts_{0};
  std::atomic<std::uint64_t> retries_{0};
};

// Reads the reply text at choices[0].message.content.
std::string chat_reply_text(const nlohmann::json& response);

std::string image_mime_type(const std::filesystem::path& path);
std::string image_data_url(const std::filesystem::path& path);

class HttpChatBackend final : public ChatBackend {
 public:
  HttpChatBackend(std::shared_ptr<HttpTransport> transport, std::string model);

  std::string complete(std::span<const ChatMessage> messages, ReplySchema hint) override;
  std::string model_id() const override { return model_; }

 private:
  std::shared_ptr<HttpTransport> transport_;
  std::string model_;
};

// Captioning through a vision-capable chat-completions endpoint; the image
// travels as a base64 data URL content part.
class HttpCaptioner final : public Captioner {
 public:
  HttpCaptioner(std::shared_ptr<HttpTransport> transport, std::string model);

  CaptionRecord caption_frame(const std::filesystem::path& image, FrameIndex frame,
                              std::string_view prompt) override;
  std::string model_id() const override { return model_; }

 private:
  std::shared_ptr<HttpTransport> transport_;
  std::string model_;
};

// Embeddings endpoint; images are sent as data URLs in the input list, text
// as plain strings. Vectors are unit-normalized on return.
class HttpEncoder final : public Encoder {
 public:
  HttpEncoder(std::shared_ptr<HttpTransport> transport, std::string model, std::size_t batch_size = 32);

  FeatureVector embed_image(const std::filesystem::path& image) override;
  FeatureVector embed_text(std::string_view text) override;
  std::vector<FeatureVector> embed_images(std::span<const std::filesystem::path> images) override;
  std::string model_id() const override { return model_; }

 private:
  std::vector<FeatureVector> request(const nlohmann::json& inputs);

  std::shared_ptr<HttpTransport> transport_;
  std::string model_;
  std::size_t batch_size_;
  std::atomic<std::size_t> dim_{0};
};

}  // namespace masr
