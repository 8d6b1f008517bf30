#pragma once

// Model-agnostic backend roles. Implementations must be safe to call
// concurrently from many tasks.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "masr/core.hpp"

namespace masr {

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

// Which structured reply the caller expects. Remote models never see this;
// mocks use it to pick a behavior.
enum class ReplySchema { Verdict, Selection };

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(std::span<const ChatMessage> messages, ReplySchema hint) = 0;
  virtual std::string model_id() const = 0;
};

class Captioner {
 public:
  virtual ~Captioner() = default;
  virtual CaptionRecord caption_frame(const std::filesystem::path& image, FrameIndex frame,
                                      std::string_view prompt) = 0;
  virtual std::string model_id() const = 0;
};

class Encoder {
 public:
  virtual ~Encoder() = default;
  virtual FeatureVector embed_image(const std::filesystem::path& image) = 0;
  virtual FeatureVector embed_text(std::string_view text) = 0;
  // Batched form; the default loops over embed_image.
  virtual std::vector<FeatureVector> embed_images(std::span<const std::filesystem::path> images);
  virtual std::string model_id() const = 0;
};

}  // namespace masr
