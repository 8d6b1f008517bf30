#pragma once

// Deterministic in-process backends for offline runs and tests.

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "masr/backends/interfaces.hpp"

namespace masr {

// What the mock reflector knows about one synthetic task.
struct MockTaskEntry {
  std::string task_id;
  std::string question;
  FrameIndex key_frame = 0;         // frame fine focusing must land on
  std::string key_caption;          // caption that answers the question
  std::optional<std::string> hint;  // when set, the key clip is only named once this caption is in context
  std::size_t gold_index = 0;
  std::size_t distractor_index = 1;

  bool operator==(const MockTaskEntry&) const = default;
};

// Lookup tables keyed by content digest (sha256 of image bytes) or raw text.
struct MockTables {
  std::size_t dim = 32;
  std::uint64_t seed = 0;
  std::map<std::string, std::vector<double>> image_embeddings;
  std::map<std::string, std::vector<double>> text_embeddings;
  std::map<std::string, std::string> captions;
  std::vector<MockTaskEntry> tasks;

  bool operator==(const MockTables&) const = default;
};

void to_json(nlohmann::json& j, const MockTaskEntry& e);
void from_json(const nlohmann::json& j, MockTaskEntry& e);
void to_json(nlohmann::json& j, const MockTables& t);
void from_json(const nlohmann::json& j, MockTables& t);

// Seeded unit vector derived from (seed, digest); stable across runs.
std::vector<double> digest_seeded_unit_vector(std::string_view digest, std::uint64_t seed, std::size_t dim);

class MockEncoder final : public Encoder {
 public:
  explicit MockEncoder(std::shared_ptr<const MockTables> tables, std::string model = "mock-encoder");

  FeatureVector embed_image(const std::filesystem::path& image) override;
  FeatureVector embed_text(std::string_view text) override;
  std::string model_id() const override { return model_; }

 private:
  std::shared_ptr<const MockTables> tables_;
  std::string model_;
};

class MockCaptioner final : public Captioner {
 public:
  explicit MockCaptioner(std::shared_ptr<const MockTables> tables, std::string model = "mock-captioner");

  CaptionRecord caption_frame(const std::filesystem::path& image, FrameIndex frame,
                              std::string_view prompt) override;
  std::string model_id() const override { return model_; }

 private:
  std::shared_ptr<const MockTables> tables_;
  std::string model_;
};

// Rule-based reflector. Answering: the gold letter with confidence 3 when
// the prompt contains the task's key caption, otherwise the distractor with
// confidence 1. Selection: the clip whose listed bounds contain key_frame
// (after the hint is in context, if the task has one), else clip 0.
class MockReflector final : public ChatBackend {
 public:
  explicit MockReflector(std::shared_ptr<const MockTables> tables, std::string model = "mock-reflector");

  std::string complete(std::span<const ChatMessage> messages, ReplySchema hint) override;
  std::string model_id() const override { return model_; }

 private:
  const MockTaskEntry* find_task(std::string_view prompt) const;

  std::shared_ptr<const MockTables> tables_;
  std::string model_;
};

// Replies produced by a caller-supplied function.
class ScriptedChat final : public ChatBackend {
 public:
  using Script = std::function<std::string(std::span<const ChatMessage>, ReplySchema)>;

  explicit ScriptedChat(Script script, std::string model = "scripted-chat");
  // Convenience: fixed replies per schema.
  ScriptedChat(std::string verdict_reply, std::string selection_reply, std::string model = "scripted-chat");

  std::string complete(std::span<const ChatMessage> messages, ReplySchema hint) override;
  std::string model_id() const override { return model_; }

 private:
  Script script_;
  std::string model_;
};

// Pass-through wrapper counting exchanges per schema.
class CountingChat final : public ChatBackend {
 public:
  explicit CountingChat(ChatBackend& inner) : inner_(inner) {}

  std::string complete(std::span<const ChatMessage> messages, ReplySchema hint) override;
  std::string model_id() const override { return inner_.model_id(); }

  int verdict_calls() const { return verdict_calls_.load(); }
  int selection_calls() const { return selection_calls_.load(); }

 private:
  ChatBackend& inner_;
  std::atomic<int> verdict_calls_{0};
  std::atomic<int> selection_calls_{0};
};

}  // namespace masr
