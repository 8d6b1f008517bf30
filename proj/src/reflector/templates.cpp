#include <fstream>
#include <sstream>

#include "masr/default_templates.hpp"
#include "masr/digest.hpp"
#include "masr/errors.hpp"
#include "masr/reflector.hpp"

namespace masr {
namespace {

bool is_placeholder_char(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }

// Calls fn(name, begin, end) for every "{name}" occurrence.
template <typename Fn>
void for_each_placeholder(std::string_view tpl, Fn&& fn) {
  std::size_t pos = 0;
  while ((pos = tpl.find('{', pos)) != std::string_view::npos) {
    std::size_t end = pos + 1;
    while (end < tpl.size() && is_placeholder_char(tpl[end])) ++end;
    if (end < tpl.size() && tpl[end] == '}' && end > pos + 1) {
      fn(tpl.substr(pos + 1, end - pos - 1), pos, end + 1);
      pos = end + 1;
    } else {
      ++pos;
    }
  }
}

}  // namespace

std::string render_template(std::string_view tpl, const std::map<std::string, std::string>& values,
                            std::span<const std::string_view> required) {
  for (std::string_view name : required) {
    const std::string needle = "{" + std::string(name) + "}";
    if (tpl.find(needle) == std::string_view::npos) {
      throw Error(ErrorKind::TemplateError, "template lacks placeholder " + needle);
    }
  }
  std::string out;
  out.reserve(tpl.size());
  std::size_t copied = 0;
  for_each_placeholder(tpl, [&](std::string_view name, std::size_t begin, std::size_t end) {
    const auto it = values.find(std::string(name));
    if (it == values.end()) {
      throw Error(ErrorKind::TemplateError, "no value for placeholder {" + std::string(name) + "}");
    }
    out.append(tpl.substr(copied, begin - copied));
    out.append(it->second);
    copied = end;
  });
  out.append(tpl.substr(copied));
  return out;
}

PromptTemplates PromptTemplates::defaults() {
  const auto& t = detail::embedded_templates();
  return PromptTemplates{t.at("answer"), t.at("selection"), t.at("context_header"), t.at("reask"),
                         t.at("caption")};
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
  PromptTemplates out = defaults();
  const auto read_if_present = [&](const char* name, std::string& slot) {
    const auto path = dir / (std::string(name) + ".txt");
    if (!std::filesystem::exists(path)) return;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot read template " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    slot = buf.str();
  };
  read_if_present("answer", out.answer);
  read_if_present("selection", out.selection);
  read_if_present("context_header", out.context_header);
  read_if_present("reask", out.reask);
  read_if_present("caption", out.caption);
  return out;
}

std::map<std::string, std::string> PromptTemplates::digests() const {
  return {{"answer", sha256_hex(answer)},
          {"selection", sha256_hex(selection)},
          {"context_header", sha256_hex(context_header)},
          {"reask", sha256_hex(reask)},
          {"caption", sha256_hex(caption)}};
}

}  // namespace masr
