#include "masr/backends/mock.hpp"

#include <cmath>
#include <random>
#include <regex>

#include "masr/digest.hpp"
#include "masr/errors.hpp"

namespace masr {
namespace {

double unit_uniform(std::mt19937_64& rng) { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; }

std::string first_user_prompt(std::span<const ChatMessage> messages) {
  for (const auto& m : messages) {
    if (m.role == "user") return m.content;
  }
  return {};
}

std::string letter(std::size_t i) { return std::string(1, static_cast<char>('A' + i)); }

}  // namespace

void to_json(nlohmann::json& j, const MockTaskEntry& e) {
  j = nlohmann::json{{"task_id", e.task_id},         {"question", e.question},
                     {"key_frame", e.key_frame},     {"key_caption", e.key_caption},
                     {"gold_index", e.gold_index},   {"distractor_index", e.distractor_index}};
  j["hint"] = e.hint ? nlohmann::json(*e.hint) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, MockTaskEntry& e) {
  j.at("task_id").get_to(e.task_id);
  j.at("question").get_to(e.question);
  j.at("key_frame").get_to(e.key_frame);
  j.at("key_caption").get_to(e.key_caption);
  j.at("gold_index").get_to(e.gold_index);
  j.at("distractor_index").get_to(e.distractor_index);
  e.hint.reset();
  if (auto it = j.find("hint"); it != j.end() && !it->is_null()) e.hint = it->get<std::string>();
}

void to_json(nlohmann::json& j, const MockTables& t) {
  j = nlohmann::json{{"dim", t.dim},
                     {"seed", t.seed},
                     {"image_embeddings", t.image_embeddings},
                     {"text_embeddings", t.text_embeddings},
                     {"captions", t.captions},
                     {"tasks", t.tasks}};
}

void from_json(const nlohmann::json& j, MockTables& t) {
  j.at("dim").get_to(t.dim);
  j.at("seed").get_to(t.seed);
  j.at("image_embeddings").get_to(t.image_embeddings);
  j.at("text_embeddings").get_to(t.text_embeddings);
  j.at("captions").get_to(t.captions);
  j.at("tasks").get_to(t.tasks);
}

std::vector<double> digest_seeded_unit_vector(std::string_view digest, std::uint64_t seed, std::size_t dim) {
  const std::string h = sha256_hex(std::to_string(seed) + ":" + std::string(digest));
  std::mt19937_64 rng(std::stoull(h.substr(0, 16), nullptr, 16));
  std::vector<double> v(dim);
  // Box-Muller on a portable uniform source.
  for (std::size_t i = 0; i < dim; ++i) {
    const double u1 = unit_uniform(rng), u2 = unit_uniform(rng);
    v[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  const auto unit = FeatureVector::normalized(std::move(v));
  return {unit.values().begin(), unit.values().end()};
}

MockEncoder::MockEncoder(std::shared_ptr<const MockTables> tables, std::string model)
    : tables_(std::move(tables)), model_(std::move(model)) {}

FeatureVector MockEncoder::embed_image(const std::filesystem::path& image) {
  const std::string digest = sha256_hex(read_file_bytes(image));
  if (auto it = tables_->image_embeddings.find(digest); it != tables_->image_embeddings.end()) {
    return FeatureVector::normalized(it->second);
  }
  return FeatureVector::normalized(digest_seeded_unit_vector(digest, tables_->seed, tables_->dim));
}

FeatureVector MockEncoder::embed_text(std::string_view text) {
  if (auto it = tables_->text_embeddings.find(std::string(text)); it != tables_->text_embeddings.end()) {
    return FeatureVector::normalized(it->second);
  }
  return FeatureVector::normalized(digest_seeded_unit_vector(sha256_hex(text), tables_->seed, tables_->dim));
}

MockCaptioner::MockCaptioner(std::shared_ptr<const MockTables> tables, std::string model)
    : tables_(std::move(tables)), model_(std::move(model)) {}

CaptionRecord MockCaptioner::caption_frame(const std::filesystem::path& image, FrameIndex frame, std::string_view) {
  const std::string digest = sha256_hex(read_file_bytes(image));
  if (auto it = tables_->captions.find(digest); it != tables_->captions.end()) {
    return CaptionRecord{frame, it->second, model_};
  }
  return CaptionRecord{frame, "an unremarkable frame (" + digest.substr(0, 8) + ")", model_};
}

MockReflector::MockReflector(std::shared_ptr<const MockTables> tables, std::string model)
    : tables_(std::move(tables)), model_(std::move(model)) {}

const MockTaskEntry* MockReflector::find_task(std::string_view prompt) const {
  const MockTaskEntry* best = nullptr;
  for (const auto& t : tables_->tasks) {
    if (t.question.empty() || prompt.find(t.question) == std::string_view::npos) continue;
    if (best == nullptr || t.question.size() > best->question.size()) best = &t;
  }
  return best;
}

std::string MockReflector::complete(std::span<const ChatMessage> messages, ReplySchema hint) {
  const std::string prompt = first_user_prompt(messages);
  const MockTaskEntry* task = find_task(prompt);

  if (hint == ReplySchema::Verdict) {
    if (task != nullptr && prompt.find(task->key_caption) != std::string::npos) {
      return nlohmann::json{{"answer", letter(task->gold_index)},
                            {"confidence", 3},
                            {"rationale", "the key evidence is in context"}}
          .dump();
    }
    const std::size_t guess = task != nullptr ? task->distractor_index : 0;
    return nlohmann::json{{"answer", letter(guess)}, {"confidence", 1}, {"rationale", "evidence is missing"}}.dump();
  }

  std::size_t chosen = 0;
  if (task != nullptr && (!task->hint || prompt.find(*task->hint) != std::string::npos)) {
    static const std::regex kClipLine(R"(clip (\d+): frames (\d+)-(\d+))");
    for (std::sregex_iterator it(prompt.begin(), prompt.end(), kClipLine), end; it != end; ++it) {
      const auto start = std::stoull((*it)[2]);
      const auto stop = std::stoull((*it)[3]);
      if (start <= task->key_frame && task->key_frame <= stop) {
        chosen = std::stoull((*it)[1]);
        break;
      }
    }
  }
  return nlohmann::json{{"clips", {chosen}}, {"reason", "mock selection"}}.dump();
}

ScriptedChat::ScriptedChat(Script script, std::string model) : script_(std::move(script)), model_(std::move(model)) {}

ScriptedChat::ScriptedChat(std::string verdict_reply, std::string selection_reply, std::string model)
    : script_([v = std::move(verdict_reply), s = std::move(selection_reply)](std::span<const ChatMessage>,
                                                                               ReplySchema h) {
        return h == ReplySchema::Verdict ? v : s;
      }),
      model_(std::move(model)) {}

std::string ScriptedChat::complete(std::span<const ChatMessage> messages, ReplySchema hint) {
  return script_(messages, hint);
}

std::string CountingChat::complete(std::span<const ChatMessage> messages, ReplySchema hint) {
  (hint == ReplySchema::Verdict ? verdict_calls_ : selection_calls_).fetch_add(1);
  return inner_.complete(messages, hint);
}

}  // namespace masr
