#include "vsr/dataset.hpp"

#include <fstream>
#include <set>
#include <unordered_set>

#include "vsr/errors.hpp"
#include "vsr/log.hpp"

namespace vsr {

using nlohmann::json;

std::string_view to_string(DeclaredType t) {
  switch (t) {
    case DeclaredType::Global: return "global";
    case DeclaredType::Local: return "local";
    case DeclaredType::Unknown: return "unknown";
  }
  return "unknown";
}

DeclaredType parse_declared_type(std::string_view s) {
  if (s == "global") return DeclaredType::Global;
  if (s == "local") return DeclaredType::Local;
  if (s == "unknown" || s.empty()) return DeclaredType::Unknown;
  throw SchemaError("type must be global, local or unknown, got '" + std::string(s) + "'");
}

void QAItem::validate() const {
  if (id.empty()) throw SchemaError("id is empty");
  if (video.video_id.empty()) throw SchemaError(id + ": video_id is empty");
  try {
    video.validate();
  } catch (const InvalidArgument& e) {
    throw SchemaError(e.what());
  }
  if (options.size() < 2 || options.size() > 6) throw SchemaError(id + ": options must have 2 to 6 entries");
  std::set<std::string> distinct(options.begin(), options.end());
  if (distinct.size() != options.size()) throw SchemaError(id + ": options are not distinct");
  if (truth.index() < 0 || truth.index() >= n_options())
    throw SchemaError(id + ": answer " + truth.str() + " is outside the " + std::to_string(n_options()) +
                      " options");
}

QAItem qa_item_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("line is not a JSON object");
  auto get = [&](const char* name) -> const json& {
    auto it = j.find(name);
    if (it == j.end()) throw SchemaError(std::string("missing field '") + name + "'");
    return *it;
  };
  QAItem item;
  try {
    item.id = get("id").get<std::string>();
    item.video.video_id = get("video_id").get<std::string>();
    item.video.n_frames = get("n_frames").get<std::int64_t>();
    item.video.fps = get("fps").get<double>();
    item.question = get("question").get<std::string>();
    item.options = get("options").get<std::vector<std::string>>();
    const auto answer = get("answer").get<std::string>();
    if (answer.size() != 1 || answer[0] < 'A' || answer[0] > 'Z')
      throw SchemaError("answer must be a single option letter, got '" + answer + "'");
    item.truth = OptionLabel(answer[0] - 'A');
    if (auto it = j.find("type"); it != j.end() && !it->is_null())
      item.declared_type = parse_declared_type(it->get<std::string>());
  } catch (const json::exception& e) {
    throw SchemaError(std::string("field has the wrong type: ") + e.what());
  }
  item.validate();
  return item;
}

json to_json(const QAItem& item) {
  json j = {{"id", item.id},
            {"video_id", item.video.video_id},
            {"n_frames", item.video.n_frames},
            {"fps", item.video.fps},
            {"question", item.question},
            {"options", item.options},
            {"answer", item.truth.str()}};
  if (item.declared_type != DeclaredType::Unknown) j["type"] = std::string(to_string(item.declared_type));
  return j;
}

DatasetLoad load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset " + path.string());
  DatasetLoad out;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  std::size_t records = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++records;
    try {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw SchemaError(std::string("invalid JSON: ") + e.what());
      }
      auto item = qa_item_from_json(j);
      if (!seen.insert(item.id).second) throw SchemaError("duplicate id '" + item.id + "'");
      out.items.push_back(std::move(item));
    } catch (const SchemaError& e) {
      out.errors.push_back({line_no, e.what()});
    }
  }
  if (in.bad()) throw IoError("error while reading " + path.string());
  if (records == 0) {
    out.warnings.push_back("dataset " + path.string() + " is empty");
    log::warn(out.warnings.back());
  }
  if (out.errors.size() * 100 > records) {
    const auto& first = out.errors.front();
    throw SchemaError(path.string() + ":" + std::to_string(first.line) + ": " + first.message + " (" +
                      std::to_string(out.errors.size()) + " of " + std::to_string(records) +
                      " lines malformed)");
  }
  for (const auto& e : out.errors)
    log::warn(path.string() + ":" + std::to_string(e.line) + ": skipped: " + e.message);
  return out;
}

void write_dataset(const std::filesystem::path& path, const std::vector<QAItem>& items) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset " + path.string());
  for (const auto& item : items) out << to_json(item).dump() << '\n';
  if (!out) throw IoError("error while writing " + path.string());
}

}  // namespace vsr
