#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace vsr {

/// A multiple-choice option letter. Stored as its 0-based index: A = 0.
class OptionLabel {
 public:
  static constexpr int kMaxOptions = 26;

  constexpr OptionLabel() = default;
  constexpr explicit OptionLabel(int index) : index_(index) {}

  /// Parses a single uppercase letter; throws InvalidArgument otherwise.
  static OptionLabel from_letter(std::string_view letter);

  constexpr int index() const { return index_; }
  char letter() const { return static_cast<char>('A' + index_); }
  std::string str() const { return std::string(1, letter()); }

  friend constexpr auto operator<=>(OptionLabel, OptionLabel) = default;

 private:
  int index_ = 0;
};

/// Distinguishes the three video-model call shapes the engine issues. The
/// simulated backend keys its behavior on this; a real adapter may ignore it.
enum class VideoTask { Answer, Probe, Narrate };

std::string_view to_string(VideoTask t);
VideoTask parse_video_task(std::string_view s);

struct DecodeParams {
  double temperature = 0.0;
  double top_p = 0.0;
  friend bool operator==(const DecodeParams&, const DecodeParams&) = default;
};

struct VideoQARequest {
  std::string video_id;
  std::string question_id;  // correlation id, echoed to the backend
  VideoTask task = VideoTask::Answer;
  std::vector<std::int64_t> frame_indices;
  std::string question_text;
  std::vector<std::string> options;
  bool want_logits = true;
  DecodeParams decode;

  /// Answer requests need options; probe and narration requests may carry none.
  void validate() const;
  friend bool operator==(const VideoQARequest&, const VideoQARequest&) = default;
};

struct VideoQAResponse {
  std::string raw_text;
  std::map<OptionLabel, double> option_logits;  // empty when not requested
  std::optional<double> yes_logit;
  std::optional<double> no_logit;
  friend bool operator==(const VideoQAResponse&, const VideoQAResponse&) = default;
};

struct TextLMRequest {
  std::string prompt;
  DecodeParams decode;
  friend bool operator==(const TextLMRequest&, const TextLMRequest&) = default;
};

struct TextLMResponse {
  std::string text;
  friend bool operator==(const TextLMResponse&, const TextLMResponse&) = default;
};

// JSON mapping. from_json throws ProtocolError on missing or mistyped fields.
nlohmann::json to_json(const VideoQARequest& r);
nlohmann::json to_json(const VideoQAResponse& r);
nlohmann::json to_json(const TextLMRequest& r);
nlohmann::json to_json(const TextLMResponse& r);
VideoQARequest video_request_from_json(const nlohmann::json& j);
VideoQAResponse video_response_from_json(const nlohmann::json& j);
TextLMRequest text_request_from_json(const nlohmann::json& j);
TextLMResponse text_response_from_json(const nlohmann::json& j);

/// First standalone option letter in `raw_text` (optionally "(A)", "A.", "A)").
/// A letter counts only if its index is below n_options. Returns nullopt
/// when nothing matches.
std::optional<OptionLabel> parse_option(std::string_view raw_text, int n_options);

struct Margin {
  OptionLabel best;
  double margin = 0.0;    // l_max - l_second, over option-letter logits
  double max_logit = 0.0;
};

/// Throws MissingLogits unless at least two option logits are present.
Margin extract_margin(const VideoQAResponse& resp);

/// Answer from a reply: the verbalized letter when parseable, otherwise the
/// logit argmax, otherwise nullopt.
std::optional<OptionLabel> resolve_answer(const VideoQAResponse& resp, int n_options);

/// Renders options as "(A) text" lines.
std::string format_options(const std::vector<std::string>& options);

}  // namespace vsr
