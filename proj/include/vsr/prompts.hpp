#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace vsr {

/// The text templates used by contextual voting. Each starts with a
/// "### task: <name>" header line and uses {placeholder} substitution.
struct PromptSet {
  std::string categorize;
  std::string keyinfo;
  std::string narrate;
  std::string summarize;
  std::string localize;

  /// Templates compiled into the library from prompts/*.txt.
  static PromptSet builtin();
  /// Reads <dir>/{categorize,keyinfo,narrate,summarize,localize}.txt.
  /// Throws IoError if any file is missing.
  static PromptSet load(const std::filesystem::path& dir);
};

/// Replaces each {name} in `tmpl` with vars[name] in a single left-to-right
/// pass; substituted text is never rescanned. Unknown placeholders stay.
std::string render_prompt(std::string_view tmpl, const std::map<std::string, std::string>& vars);

/// The task name from the "### task: <name>" header, if present.
std::optional<std::string> prompt_task(std::string_view prompt);

}  // namespace vsr
