#pragma once

// Content-addressed on-disk store for captions and embeddings.
//
// Layout: <root>/<h[0:2]>/<h[2:4]>/<h>.json where h = sha256 over the key
// fields. Each file holds {key: {role, model_id, digest}, value, created_at}
// and is published with write-temp-then-rename. Concurrent misses for one
// key collapse to a single computation, within a process through shared
// futures and across processes through flock() on a per-shard lock file.

#include <atomic>
#include <filesystem>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "masr/backends/interfaces.hpp"

namespace masr {

namespace cache_role {
inline constexpr std::string_view kEmbedImage = "embed_image";
inline constexpr std::string_view kEmbedText = "embed_text";
inline constexpr std::string_view kCaption = "caption";
}  // namespace cache_role

struct CacheKey {
  std::string role;
  std::string model_id;
  std::string content_digest;

  std::string storage_id() const;
  bool operator==(const CacheKey&) const = default;
};

class ContentCache {
 public:
  explicit ContentCache(std::filesystem::path root);

  std::optional<nlohmann::json> lookup(const CacheKey& key);
  void store(const CacheKey& key, const nlohmann::json& value);

  nlohmann::json get_or_compute(const CacheKey& key, const std::function<nlohmann::json()>& compute);

  // `compute` receives positions (into `keys`) of the entries that must be
  // produced and returns their values in the same order.
  using BatchCompute = std::function<std::vector<nlohmann::json>(std::span<const std::size_t>)>;
  std::vector<nlohmann::json> get_or_compute_many(std::span<const CacheKey> keys, const BatchCompute& compute);

  std::filesystem::path path_for(const CacheKey& key) const;
  const std::filesystem::path& root() const { return root_; }

  std::uint64_t hits() const { return hits_.load(); }
  std::uint64_t computed() const { return computed_.load(); }

 private:
  std::optional<nlohmann::json> read_disk(const CacheKey& key, const std::string& id) const;

  std::filesystem::path root_;
  std::mutex mu_;
  std::unordered_map<std::string, nlohmann::json> memory_;
  std::unordered_map<std::string, std::shared_future<nlohmann::json>> inflight_;
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> computed_{0};
};

class CachedCaptioner final : public Captioner {
 public:
  CachedCaptioner(std::shared_ptr<Captioner> inner, std::shared_ptr<ContentCache> cache);

  CaptionRecord caption_frame(const std::filesystem::path& image, FrameIndex frame,
                              std::string_view prompt) override;
  std::string model_id() const override { return inner_->model_id(); }

 private:
  std::shared_ptr<Captioner> inner_;
  std::shared_ptr<ContentCache> cache_;
};

class CachedEncoder final : public Encoder {
 public:
  CachedEncoder(std::shared_ptr<Encoder> inner, std::shared_ptr<ContentCache> cache);

  FeatureVector embed_image(const std::filesystem::path& image) override;
  FeatureVector embed_text(std::string_view text) override;
  std::vector<FeatureVector> embed_images(std::span<const std::filesystem::path> images) override;
  std::string model_id() const override { return inner_->model_id(); }

 private:
  FeatureVector checked(const nlohmann::json& values);

  std::shared_ptr<Encoder> inner_;
  std::shared_ptr<ContentCache> cache_;
  std::atomic<std::size_t> dim_{0};
};

}  // namespace masr
