#include "vsr/prompts.hpp"

#include <fstream>
#include <sstream>

#include "vsr/embedded_prompts.hpp"
#include "vsr/errors.hpp"

namespace vsr {

PromptSet PromptSet::builtin() {
  return PromptSet{std::string(embedded::k_categorize), std::string(embedded::k_keyinfo),
                   std::string(embedded::k_narrate), std::string(embedded::k_summarize),
                   std::string(embedded::k_localize)};
}

PromptSet PromptSet::load(const std::filesystem::path& dir) {
  auto read = [&](const char* name) {
    const auto path = dir / (std::string(name) + ".txt");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read prompt template " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  return PromptSet{read("categorize"), read("keyinfo"), read("narrate"), read("summarize"), read("localize")};
}

std::string render_prompt(std::string_view tmpl, const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        auto it = vars.find(std::string(tmpl.substr(i + 1, close - i - 1)));
        if (it != vars.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

std::optional<std::string> prompt_task(std::string_view prompt) {
  constexpr std::string_view marker = "### task: ";
  if (!prompt.starts_with(marker)) return std::nullopt;
  prompt.remove_prefix(marker.size());
  const auto end = prompt.find_first_of(" \r\n");
  return std::string(prompt.substr(0, end));
}

}  // namespace vsr
