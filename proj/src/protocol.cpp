#include "vsr/protocol.hpp"

#include <cmath>

#include "vsr/errors.hpp"

namespace vsr {

using nlohmann::json;

OptionLabel OptionLabel::from_letter(std::string_view letter) {
  if (letter.size() != 1 || letter[0] < 'A' || letter[0] > 'Z')
    throw InvalidArgument("not an option letter: '" + std::string(letter) + "'");
  return OptionLabel(letter[0] - 'A');
}

std::string_view to_string(VideoTask t) {
  switch (t) {
    case VideoTask::Answer: return "answer";
    case VideoTask::Probe: return "probe";
    case VideoTask::Narrate: return "narrate";
  }
  return "?";
}

VideoTask parse_video_task(std::string_view s) {
  if (s == "answer") return VideoTask::Answer;
  if (s == "probe") return VideoTask::Probe;
  if (s == "narrate") return VideoTask::Narrate;
  throw ProtocolError("unknown task: " + std::string(s));
}

void VideoQARequest::validate() const {
  if (video_id.empty()) throw InvalidArgument("video_qa request without video_id");
  if (task == VideoTask::Answer && options.empty())
    throw InvalidArgument("video_qa answer request without options");
  if (options.size() > OptionLabel::kMaxOptions) throw InvalidArgument("too many options");
  for (auto f : frame_indices)
    if (f < 0) throw InvalidArgument("negative frame index");
}

namespace {

template <typename T>
T field(const json& j, const char* name) {
  if (!j.is_object()) throw ProtocolError("expected a JSON object");
  auto it = j.find(name);
  if (it == j.end()) throw ProtocolError(std::string("missing field '") + name + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ProtocolError(std::string("field '") + name + "' has the wrong type");
  }
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ProtocolError(std::string("field '") + name + "' has the wrong type");
  }
}

json decode_json(const DecodeParams& d) { return {{"temperature", d.temperature}, {"top_p", d.top_p}}; }

DecodeParams decode_from(const json& j) {
  DecodeParams d;
  if (auto it = j.find("decode"); it != j.end()) {
    d.temperature = field<double>(*it, "temperature");
    d.top_p = field<double>(*it, "top_p");
  }
  return d;
}

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' ||
         c >= 0x80;
}

}  // namespace

json to_json(const VideoQARequest& r) {
  return {{"video_id", r.video_id},
          {"question_id", r.question_id},
          {"task", std::string(to_string(r.task))},
          {"frame_indices", r.frame_indices},
          {"question_text", r.question_text},
          {"options", r.options},
          {"want_logits", r.want_logits},
          {"decode", decode_json(r.decode)}};
}

json to_json(const VideoQAResponse& r) {
  json j = {{"raw_text", r.raw_text}};
  if (!r.option_logits.empty()) {
    json logits = json::object();
    for (const auto& [label, v] : r.option_logits) logits[label.str()] = v;
    j["option_logits"] = std::move(logits);
  }
  if (r.yes_logit) j["yes_logit"] = *r.yes_logit;
  if (r.no_logit) j["no_logit"] = *r.no_logit;
  return j;
}

json to_json(const TextLMRequest& r) { return {{"prompt", r.prompt}, {"decode", decode_json(r.decode)}}; }

json to_json(const TextLMResponse& r) { return {{"text", r.text}}; }

VideoQARequest video_request_from_json(const json& j) {
  VideoQARequest r;
  r.video_id = field<std::string>(j, "video_id");
  r.question_id = optional_field<std::string>(j, "question_id").value_or("");
  r.task = parse_video_task(optional_field<std::string>(j, "task").value_or("answer"));
  r.frame_indices = field<std::vector<std::int64_t>>(j, "frame_indices");
  r.question_text = field<std::string>(j, "question_text");
  r.options = field<std::vector<std::string>>(j, "options");
  r.want_logits = optional_field<bool>(j, "want_logits").value_or(false);
  r.decode = decode_from(j);
  return r;
}

VideoQAResponse video_response_from_json(const json& j) {
  VideoQAResponse r;
  r.raw_text = field<std::string>(j, "raw_text");
  if (auto it = j.find("option_logits"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) throw ProtocolError("option_logits must be an object");
    for (const auto& [key, value] : it->items()) {
      if (!value.is_number()) throw ProtocolError("option_logits['" + key + "'] is not a number");
      try {
        r.option_logits[OptionLabel::from_letter(key)] = value.get<double>();
      } catch (const InvalidArgument& e) {
        throw ProtocolError(e.what());
      }
    }
  }
  r.yes_logit = optional_field<double>(j, "yes_logit");
  r.no_logit = optional_field<double>(j, "no_logit");
  return r;
}

TextLMRequest text_request_from_json(const json& j) {
  return TextLMRequest{field<std::string>(j, "prompt"), decode_from(j)};
}

TextLMResponse text_response_from_json(const json& j) { return TextLMResponse{field<std::string>(j, "text")}; }

std::optional<OptionLabel> parse_option(std::string_view raw_text, int n_options) {
  if (n_options < 2) throw InvalidArgument("parse_option needs at least two options");
  const auto n = raw_text.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<unsigned char>(raw_text[i]);
    if (c < 'A' || c > 'Z') continue;
    const bool left_ok = i == 0 || !is_word_byte(static_cast<unsigned char>(raw_text[i - 1]));
    const bool right_ok = i + 1 == n || !is_word_byte(static_cast<unsigned char>(raw_text[i + 1]));
    if (left_ok && right_ok && c - 'A' < n_options) return OptionLabel(c - 'A');
  }
  return std::nullopt;
}

Margin extract_margin(const VideoQAResponse& resp) {
  if (resp.option_logits.size() < 2) throw MissingLogits("response carries fewer than two option logits");
  // std::map iterates labels alphabetically, so strict '>' keeps the
  // smallest label on ties.
  auto best = resp.option_logits.begin();
  for (auto it = resp.option_logits.begin(); it != resp.option_logits.end(); ++it)
    if (it->second > best->second) best = it;
  double second = -INFINITY;
  for (auto it = resp.option_logits.begin(); it != resp.option_logits.end(); ++it)
    if (it != best && it->second > second) second = it->second;
  return Margin{best->first, best->second - second, best->second};
}

std::optional<OptionLabel> resolve_answer(const VideoQAResponse& resp, int n_options) {
  if (auto parsed = parse_option(resp.raw_text, n_options)) return parsed;
  if (resp.option_logits.size() >= 2) {
    const auto m = extract_margin(resp);
    if (m.best.index() < n_options) return m.best;
  }
  return std::nullopt;
}

std::string format_options(const std::vector<std::string>& options) {
  std::string out;
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (i) out += '\n';
    out += '(';
    out += OptionLabel(static_cast<int>(i)).letter();
    out += ") ";
    out += options[i];
  }
  return out;
}

}  // namespace vsr
