#include "masr/backends/cache.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "masr/digest.hpp"
#include "masr/errors.hpp"

namespace masr {
namespace {

class ShardLock {
 public:
  explicit ShardLock(const std::filesystem::path& path) {
    std::filesystem::create_directories(path.parent_path());
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error(ErrorKind::Io, "cannot open lock file " + path.string());
    while (::flock(fd_, LOCK_EX) != 0) {
      if (errno != EINTR) {
        ::close(fd_);
        throw Error(ErrorKind::Io, "flock failed on " + path.string());
      }
    }
  }
  ~ShardLock() {
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
    }
  }
  ShardLock(const ShardLock&) = delete;
  ShardLock& operator=(const ShardLock&) = delete;
  ShardLock(ShardLock&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }

 private:
  int fd_ = -1;
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json key_json(const CacheKey& key) {
  return {{"role", key.role}, {"model_id", key.model_id}, {"digest", key.content_digest}};
}

std::atomic<std::uint64_t> g_tmp_counter{0};

}  // namespace

std::string CacheKey::storage_id() const {
  std::string material = role;
  material.push_back('\0');
  material += model_id;
  material.push_back('\0');
  material += content_digest;
  return sha256_hex(material);
}

ContentCache::ContentCache(std::filesystem::path root) : root_(std::move(root)) {
  std::filesystem::create_directories(root_);
}

std::filesystem::path ContentCache::path_for(const CacheKey& key) const {
  const std::string id = key.storage_id();
  return root_ / id.substr(0, 2) / id.substr(2, 2) / (id + ".json");
}

std::optional<nlohmann::json> ContentCache::read_disk(const CacheKey& key, const std::string& id) const {
  const auto path = root_ / id.substr(0, 2) / id.substr(2, 2) / (id + ".json");
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  auto doc = nlohmann::json::parse(buf.str(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("value")) return std::nullopt;
  if (doc.value("key", nlohmann::json::object()) != key_json(key)) return std::nullopt;
  return doc.at("value");
}

std::optional<nlohmann::json> ContentCache::lookup(const CacheKey& key) {
  const std::string id = key.storage_id();
  {
    std::lock_guard lock(mu_);
    if (auto it = memory_.find(id); it != memory_.end()) return it->second;
  }
  auto value = read_disk(key, id);
  if (value) {
    std::lock_guard lock(mu_);
    memory_.emplace(id, *value);
  }
  return value;
}

void ContentCache::store(const CacheKey& key, const nlohmann::json& value) {
  const auto path = path_for(key);
  std::filesystem::create_directories(path.parent_path());
  const nlohmann::json record{{"key", key_json(key)}, {"value", value}, {"created_at", utc_now()}};
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(g_tmp_counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write cache record " + tmp.string());
    out << record.dump();
    if (!out.flush()) throw Error(ErrorKind::Io, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot publish cache record " + path.string());
  }
  std::lock_guard lock(mu_);
  memory_.insert_or_assign(key.storage_id(), value);
}

nlohmann::json ContentCache::get_or_compute(const CacheKey& key, const std::function<nlohmann::json()>& compute) {
  const CacheKey keys[] = {key};
  return get_or_compute_many(keys, [&](std::span<const std::size_t>) {
    return std::vector<nlohmann::json>{compute()};
  }).front();
}

std::vector<nlohmann::json> ContentCache::get_or_compute_many(std::span<const CacheKey> keys,
                                                              const BatchCompute& compute) {
  const std::size_t n = keys.size();
  std::vector<std::optional<nlohmann::json>> results(n);
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = keys[i].storage_id();

  std::vector<std::size_t> pending;
  {
    std::lock_guard lock(mu_);
    for (std::size_t i = 0; i < n; ++i) {
      if (auto it = memory_.find(ids[i]); it != memory_.end()) results[i] = it->second;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (results[i]) continue;
    if (auto v = read_disk(keys[i], ids[i])) {
      std::lock_guard lock(mu_);
      memory_.emplace(ids[i], *v);
      results[i] = std::move(v);
    } else {
      pending.push_back(i);
    }
  }
  hits_ += n - pending.size();

  std::vector<std::size_t> owned;
  std::vector<std::pair<std::size_t, std::shared_future<nlohmann::json>>> waiting;
  std::unordered_map<std::string, std::promise<nlohmann::json>> promises;
  {
    std::lock_guard lock(mu_);
    for (std::size_t i : pending) {
      if (auto it = memory_.find(ids[i]); it != memory_.end()) {
        results[i] = it->second;
        ++hits_;
      } else if (auto f = inflight_.find(ids[i]); f != inflight_.end()) {
        waiting.emplace_back(i, f->second);
      } else {
        auto& p = promises[ids[i]];
        inflight_.emplace(ids[i], p.get_future().share());
        owned.push_back(i);
      }
    }
  }

  if (!owned.empty()) {
    try {
      std::set<std::filesystem::path> lock_files;
      for (std::size_t i : owned) lock_files.insert(root_ / ids[i].substr(0, 2) / ".lock");
      std::vector<ShardLock> locks;
      locks.reserve(lock_files.size());
      for (const auto& f : lock_files) locks.emplace_back(f);

      std::vector<std::size_t> missing;
      for (std::size_t i : owned) {
        if (auto v = read_disk(keys[i], ids[i])) {
          results[i] = std::move(v);
          ++hits_;
        } else {
          missing.push_back(i);
        }
      }
      if (!missing.empty()) {
        auto values = compute(missing);
        if (values.size() != missing.size()) {
          throw Error(ErrorKind::InvalidArgument, "cache compute returned the wrong number of values");
        }
        for (std::size_t j = 0; j < missing.size(); ++j) {
          store(keys[missing[j]], values[j]);
          results[missing[j]] = std::move(values[j]);
        }
        computed_ += missing.size();
      }
    } catch (...) {
      std::lock_guard lock(mu_);
      for (std::size_t i : owned) {
        promises.at(ids[i]).set_exception(std::current_exception());
        inflight_.erase(ids[i]);
      }
      throw;
    }
    std::lock_guard lock(mu_);
    for (std::size_t i : owned) {
      memory_.insert_or_assign(ids[i], *results[i]);
      promises.at(ids[i]).set_value(*results[i]);
      inflight_.erase(ids[i]);
    }
  }

  for (auto& [i, fut] : waiting) results[i] = fut.get();

  std::vector<nlohmann::json> out;
  out.reserve(n);
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

CachedCaptioner::CachedCaptioner(std::shared_ptr<Captioner> inner, std::shared_ptr<ContentCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

CaptionRecord CachedCaptioner::caption_frame(const std::filesystem::path& image, FrameIndex frame,
                                             std::string_view prompt) {
  const std::string digest = sha256_hex(read_file_bytes(image));
  // The prompt shapes the caption, so it is part of the model identity.
  const CacheKey key{std::string(cache_role::kCaption),
                     inner_->model_id() + "|prompt:" + sha256_hex(prompt).substr(0, 16), digest};
  const auto value = cache_->get_or_compute(key, [&] {
    return nlohmann::json(inner_->caption_frame(image, frame, prompt).text);
  });
  return CaptionRecord{frame, value.get<std::string>(), inner_->model_id()};
}

CachedEncoder::CachedEncoder(std::shared_ptr<Encoder> inner, std::shared_ptr<ContentCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

FeatureVector CachedEncoder::checked(const nlohmann::json& values) {
  auto v = values.get<std::vector<double>>();
  std::size_t expected = 0;
  if (!dim_.compare_exchange_strong(expected, v.size()) && expected != v.size()) {
    throw Error(ErrorKind::DimInconsistent,
                "cached/encoded dims differ: " + std::to_string(v.size()) + " vs " + std::to_string(expected));
  }
  return FeatureVector::normalized(std::move(v));
}

FeatureVector CachedEncoder::embed_image(const std::filesystem::path& image) {
  const std::filesystem::path one[] = {image};
  return embed_images(one).front();
}

FeatureVector CachedEncoder::embed_text(std::string_view text) {
  const CacheKey key{std::string(cache_role::kEmbedText), inner_->model_id(), sha256_hex(text)};
  const auto value = cache_->get_or_compute(key, [&] {
    const FeatureVector v = inner_->embed_text(text);
    return nlohmann::json(std::vector<double>(v.values().begin(), v.values().end()));
  });
  return checked(value);
}

std::vector<FeatureVector> CachedEncoder::embed_images(std::span<const std::filesystem::path> images) {
  std::vector<CacheKey> keys;
  keys.reserve(images.size());
  for (const auto& p : images) {
    keys.push_back(CacheKey{std::string(cache_role::kEmbedImage), inner_->model_id(), sha256_hex(read_file_bytes(p))});
  }
  const auto values = cache_->get_or_compute_many(keys, [&](std::span<const std::size_t> missing) {
    std::vector<std::filesystem::path> subset;
    subset.reserve(missing.size());
    for (std::size_t i : missing) subset.push_back(images[i]);
    const auto vecs = inner_->embed_images(subset);
    std::vector<nlohmann::json> out;
    out.reserve(vecs.size());
    for (const auto& v : vecs) out.emplace_back(std::vector<double>(v.values().begin(), v.values().end()));
    return out;
  });
  std::vector<FeatureVector> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(checked(v));
  return out;
}

}  // namespace masr
