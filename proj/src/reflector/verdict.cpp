#include <cctype>
#include <cmath>

#include "masr/errors.hpp"
#include "masr/reflector.hpp"

namespace masr {
namespace {

// Index one past the brace matching text[open], or npos.
std::size_t match_brace(std::string_view text, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

std::optional<std::size_t> letter_index(const nlohmann::json& answer, std::size_t n_options) {
  if (!answer.is_string()) return std::nullopt;
  std::string s;
  for (char c : answer.get<std::string>()) {
    if (!std::isspace(static_cast<unsigned char>(c)) && c != '(' && c != ')' && c != '.') s.push_back(c);
  }
  if (s.size() != 1 || !std::isalpha(static_cast<unsigned char>(s[0]))) return std::nullopt;
  const auto idx = static_cast<std::size_t>(std::toupper(static_cast<unsigned char>(s[0])) - 'A');
  if (idx >= n_options) return std::nullopt;
  return idx;
}

std::optional<int> confidence_value(const nlohmann::json& c) {
  double v = 0.0;
  if (c.is_number()) {
    v = c.get<double>();
  } else if (c.is_string()) {
    const auto s = c.get<std::string>();
    if (s.size() != 1 || !std::isdigit(static_cast<unsigned char>(s[0]))) return std::nullopt;
    v = s[0] - '0';
  } else {
    return std::nullopt;
  }
  if (v != std::floor(v) || v < 1 || v > 3) return std::nullopt;
  return static_cast<int>(v);
}

}  // namespace

std::optional<nlohmann::json> extract_first_json_object(std::string_view text) {
  for (std::size_t pos = text.find('{'); pos != std::string_view::npos; pos = text.find('{', pos + 1)) {
    const std::size_t end = match_brace(text, pos);
    if (end == std::string_view::npos) continue;
    auto parsed = nlohmann::json::parse(text.substr(pos, end - pos), nullptr, /*allow_exceptions=*/false);
    if (parsed.is_object()) return parsed;
  }
  return std::nullopt;
}

Verdict parse_verdict(std::string_view raw_reply, std::size_t n_options) {
  const auto obj = extract_first_json_object(raw_reply);
  if (!obj) throw Error(ErrorKind::Unparseable, "reply holds no JSON object");
  const auto answer = obj->find("answer");
  const auto confidence = obj->find("confidence");
  if (answer == obj->end() || confidence == obj->end()) {
    throw Error(ErrorKind::Unparseable, "verdict needs both 'answer' and 'confidence'");
  }
  const auto idx = letter_index(*answer, n_options);
  if (!idx) throw Error(ErrorKind::Unparseable, "answer " + answer->dump() + " is not a valid option letter");
  const auto conf = confidence_value(*confidence);
  if (!conf) throw Error(ErrorKind::Unparseable, "confidence " + confidence->dump() + " not in {1,2,3}");
  Verdict v{*idx, *conf, {}};
  if (auto it = obj->find("rationale"); it != obj->end() && it->is_string()) v.rationale = it->get<std::string>();
  return v;
}

GradedVerdict answer_and_grade(const QaTask& task, const ContextLedger& ledger, ChatBackend& chat,
                               const PromptTemplates& templates) {
  auto messages = render_answer_prompt(task, ledger, templates);
  GradedVerdict out;
  std::string reply = chat.complete(messages, ReplySchema::Verdict);
  out.exchanges = 1;
  try {
    out.verdict = parse_verdict(reply, task.options.size());
    return out;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Unparseable) throw;
    out.warnings.push_back(std::string("verdict unparseable, re-asking: ") + e.what());
  }
  messages.push_back(ChatMessage{"assistant", reply});
  messages.push_back(ChatMessage{"user", templates.reask});
  reply = chat.complete(messages, ReplySchema::Verdict);
  out.exchanges = 2;
  try {
    out.verdict = parse_verdict(reply, task.options.size());
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Unparseable) throw;
    out.warnings.push_back(std::string("verdict unparseable after re-ask, using fallback: ") + e.what());
    out.verdict = Verdict{0, 1, std::string(kParseFailureRationale)};
    out.fallback = true;
  }
  return out;
}

}  // namespace masr
