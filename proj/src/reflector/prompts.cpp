#include <array>
#include <cstdio>
#include <sstream>

#include "masr/errors.hpp"
#include "masr/reflector.hpp"

namespace masr {
namespace {

std::string trim_right(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r' || s.back() == ' ')) s.pop_back();
  return s;
}

std::string seconds(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", t);
  return buf;
}

constexpr std::array<std::string_view, 3> kAnswerPlaceholders{"question", "options", "context"};
constexpr std::array<std::string_view, 5> kSelectionPlaceholders{"question", "options", "context", "clips",
                                                                 "k_c"};

}  // namespace

std::string option_letter(std::size_t index) {
  if (index >= 26) throw Error(ErrorKind::InvalidArgument, "more than 26 options");
  return std::string(1, static_cast<char>('A' + index));
}

std::string render_options(const QaTask& task) {
  std::ostringstream os;
  for (std::size_t i = 0; i < task.options.size(); ++i) {
    if (i) os << '\n';
    os << option_letter(i) << ". " << task.options[i];
  }
  return os.str();
}

std::string render_context(const ContextLedger& ledger, const PromptTemplates& templates) {
  std::ostringstream os;
  os << trim_right(templates.context_header) << '\n';
  if (ledger.empty()) {
    os << "(no frame captions have been collected yet)";
    return os.str();
  }
  bool first = true;
  for (const auto& [frame, entry] : ledger.entries()) {
    if (!first) os << '\n';
    first = false;
    os << "[frame " << frame << " @ " << seconds(entry.timestamp_s) << " s] " << entry.caption.text;
  }
  return os.str();
}

std::string render_clip_list(std::span<const Clip> clips, const FrameManifest& manifest) {
  std::ostringstream os;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const Clip& c = clips[i];
    validate_clip(c, manifest.frame_count());
    if (i) os << '\n';
    os << "clip " << i << ": frames " << c.start << "-" << c.end << " ("
       << seconds(manifest.frames[c.start].timestamp_s) << " s to " << seconds(manifest.frames[c.end].timestamp_s)
       << " s)";
  }
  return os.str();
}

std::vector<ChatMessage> render_answer_prompt(const QaTask& task, const ContextLedger& ledger,
                                              const PromptTemplates& templates) {
  validate_task(task);
  const std::map<std::string, std::string> values{
      {"question", task.question},
      {"options", render_options(task)},
      {"context", render_context(ledger, templates)},
  };
  return {ChatMessage{"user", render_template(templates.answer, values, kAnswerPlaceholders)}};
}

std::vector<ChatMessage> render_selection_prompt(const QaTask& task, const ContextLedger& ledger,
                                                 std::span<const Clip> clips, const FrameManifest& manifest,
                                                 std::size_t k_c, const PromptTemplates& templates) {
  validate_task(task);
  const std::map<std::string, std::string> values{
      {"question", task.question},
      {"options", render_options(task)},
      {"context", render_context(ledger, templates)},
      {"clips", render_clip_list(clips, manifest)},
      {"k_c", std::to_string(k_c)},
  };
  return {ChatMessage{"user", render_template(templates.selection, values, kSelectionPlaceholders)}};
}

}  // namespace masr
