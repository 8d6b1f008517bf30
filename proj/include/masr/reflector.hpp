#pragma once

// The single reflector LLM: prompt assembly for answering and clip
// selection, confidence self-grading, verdict parsing.

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "masr/backends/interfaces.hpp"
#include "masr/core.hpp"

namespace masr {

// Text templates with {name} placeholders. Only lowercase identifiers in
// braces are placeholders, so literal JSON examples are left alone.
struct PromptTemplates {
  std::string answer;          // {question} {options} {context}
  std::string selection;       // {question} {options} {context} {clips} {k_c}
  std::string context_header;  // framing line placed above the evidence
  std::string reask;           // sent after an unparseable reply
  std::string caption;         // per-frame captioning instruction

  // Templates compiled in from the repository's templates/ directory.
  static PromptTemplates defaults();
  // Loads <dir>/{answer,selection,context_header,reask,caption}.txt; files
  // that are absent keep the default. Throws Io.
  static PromptTemplates load(const std::filesystem::path& dir);

  // name -> sha256 of template text.
  std::map<std::string, std::string> digests() const;

  bool operator==(const PromptTemplates&) const = default;
};

// Replaces every {name} with values.at(name). Throws TemplateError when a
// placeholder has no value or a name in `required` is absent from the
// template.
std::string render_template(std::string_view tpl, const std::map<std::string, std::string>& values,
                            std::span<const std::string_view> required = {});

std::string option_letter(std::size_t index);
std::string render_options(const QaTask& task);
// "[frame i @ t s] caption" lines in ascending frame order, preceded by the
// context header; an explicit notice when the ledger is empty.
std::string render_context(const ContextLedger& ledger, const PromptTemplates& templates);
std::string render_clip_list(std::span<const Clip> clips, const FrameManifest& manifest);

std::vector<ChatMessage> render_answer_prompt(const QaTask& task, const ContextLedger& ledger,
                                              const PromptTemplates& templates);
std::vector<ChatMessage> render_selection_prompt(const QaTask& task, const ContextLedger& ledger,
                                                 std::span<const Clip> clips, const FrameManifest& manifest,
                                                 std::size_t k_c, const PromptTemplates& templates);

// First balanced {...} span in `text` that parses as a JSON object.
std::optional<nlohmann::json> extract_first_json_object(std::string_view text);

// Throws Unparseable when no valid verdict object is found.
Verdict parse_verdict(std::string_view raw_reply, std::size_t n_options);

struct GradedVerdict {
  Verdict verdict;
  int exchanges = 0;      // chat calls made, 1 or 2
  bool fallback = false;  // both replies were unparseable
  std::vector<std::string> warnings;
};

inline constexpr std::string_view kParseFailureRationale = "parse-failure fallback";

// One answering exchange plus at most one re-ask. A second parse failure
// yields {first option, confidence 1} with a warning instead of throwing.
// Backend errors propagate.
GradedVerdict answer_and_grade(const QaTask& task, const ContextLedger& ledger, ChatBackend& chat,
                               const PromptTemplates& templates);

}  // namespace masr
