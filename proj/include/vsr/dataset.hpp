#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vsr/protocol.hpp"
#include "vsr/sampling.hpp"

namespace vsr {

enum class DeclaredType { Unknown, Global, Local };

std::string_view to_string(DeclaredType t);
DeclaredType parse_declared_type(std::string_view s);

/// One multiple-choice question about a video.
struct QAItem {
  std::string id;
  VideoMeta video;
  std::string question;
  std::vector<std::string> options;  // 2..6 distinct texts
  OptionLabel truth;
  DeclaredType declared_type = DeclaredType::Unknown;

  int n_options() const { return static_cast<int>(options.size()); }
  /// Throws SchemaError describing the first violated invariant.
  void validate() const;
};

/// One dataset line: id, video_id, n_frames, fps, question, options, answer, type?
QAItem qa_item_from_json(const nlohmann::json& j);
nlohmann::json to_json(const QAItem& item);

struct LineError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct DatasetLoad {
  std::vector<QAItem> items;
  std::vector<LineError> errors;
  std::vector<std::string> warnings;
};

/// Reads a JSONL dataset. Blank lines are skipped. Malformed lines are
/// collected; if more than 1% of the non-blank lines are malformed the load
/// fails with a SchemaError naming the first bad line. Duplicate ids are
/// malformed. Throws IoError when the file cannot be read.
DatasetLoad load_dataset(const std::filesystem::path& path);

/// Writes items as JSONL in the format load_dataset reads.
void write_dataset(const std::filesystem::path& path, const std::vector<QAItem>& items);

}  // namespace vsr
