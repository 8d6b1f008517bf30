#include "masr/errors.hpp"
#include "masr/focus.hpp"

namespace masr {
namespace {

constexpr int kSelectionReprompts = 2;

std::optional<nlohmann::json> parse_selection(std::string_view reply) {
  auto obj = extract_first_json_object(reply);
  if (!obj) return std::nullopt;
  const auto it = obj->find("clips");
  if (it == obj->end() || !it->is_array()) return std::nullopt;
  return obj;
}

}  // namespace

SelectionOutcome coarse_select(const QaTask& task, const ContextLedger& ledger, std::span<const Clip> all_clips,
                               const FrameManifest& manifest, std::size_t k_c, ChatBackend& chat,
                               const PromptTemplates& templates) {
  if (ledger.empty()) throw Error(ErrorKind::InvalidArgument, "coarse selection needs collected context");
  if (all_clips.empty()) throw Error(ErrorKind::EmptyCandidates, "no clips to select from");
  if (k_c == 0) throw Error(ErrorKind::InvalidArgument, "k_c must be >= 1");

  SelectionOutcome out;
  auto messages = render_selection_prompt(task, ledger, all_clips, manifest, k_c, templates);
  std::optional<nlohmann::json> parsed;
  for (int attempt = 0; attempt <= kSelectionReprompts; ++attempt) {
    const std::string reply = chat.complete(messages, ReplySchema::Selection);
    ++out.exchanges;
    parsed = parse_selection(reply);
    if (parsed) break;
    out.warnings.push_back("selection reply unparseable (attempt " + std::to_string(attempt + 1) + ")");
    messages.push_back(ChatMessage{"assistant", reply});
    messages.push_back(ChatMessage{"user", templates.reask});
  }
  if (!parsed) {
    throw Error(ErrorKind::UnparseableSelection,
                "no valid selection after " + std::to_string(out.exchanges) + " replies");
  }

  for (const auto& id : parsed->at("clips")) {
    const bool integral = id.is_number_integer() || id.is_number_unsigned();
    if (!integral || id.get<std::int64_t>() < 0 ||
        static_cast<std::size_t>(id.get<std::int64_t>()) >= all_clips.size()) {
      out.warnings.push_back("dropped invalid clip id " + id.dump());
      continue;
    }
    const auto idx = static_cast<std::size_t>(id.get<std::int64_t>());
    if (std::find(out.clip_ids.begin(), out.clip_ids.end(), idx) != out.clip_ids.end()) {
      out.warnings.push_back("dropped duplicate clip id " + id.dump());
      continue;
    }
    out.clip_ids.push_back(idx);
  }
  if (out.clip_ids.size() > k_c) {
    out.warnings.push_back("selection truncated from " + std::to_string(out.clip_ids.size()) + " to k_c=" +
                           std::to_string(k_c) + " clips");
    out.clip_ids.resize(k_c);
  }
  if (out.clip_ids.empty()) throw Error(ErrorKind::EmptySelection, "reply named no valid clip");
  for (std::size_t idx : out.clip_ids) out.clips.push_back(all_clips[idx]);
  if (auto it = parsed->find("reason"); it != parsed->end() && it->is_string()) out.reason = it->get<std::string>();
  return out;
}

}  // namespace masr
