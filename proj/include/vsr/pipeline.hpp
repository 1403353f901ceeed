#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vsr/clients.hpp"
#include "vsr/config.hpp"
#include "vsr/dataset.hpp"
#include "vsr/scoring.hpp"
#include "vsr/sim_world.hpp"
#include "vsr/voting.hpp"

namespace vsr {

struct SampleRecord {
  int sample_index = 0;
  std::uint64_t seed = 0;
  std::optional<OptionLabel> option;  // empty when the sample was dropped
  double margin = 0.0;
  double max_logit = 0.0;
  std::string raw_text;
  std::string error;  // error kind for dropped samples, empty otherwise
};

struct QuestionRecord {
  std::string id;
  OptionLabel truth;
  int n_options = 0;
  int n_requested = 0;
  bool failed = false;
  std::string failure;  // error kind when failed
  std::vector<SampleRecord> samples;  // all requested samples, by index

  bool consensus = false;
  std::optional<OptionLabel> majority;
  std::optional<OptionLabel> selected;
  std::vector<OptionScore> scores;  // empty for consensus and failed questions

  std::optional<QuestionKind> category;
  bool category_parsed = false;
  std::optional<OptionLabel> complementary;
  std::optional<int> chosen_segment;
  std::vector<double> probe_scores;

  std::int64_t sampling_video_calls = 0;
  std::int64_t voting_video_calls = 0;
  std::int64_t text_calls = 0;

  bool correct() const { return selected && *selected == truth; }
  bool majority_correct() const { return majority && *majority == truth; }

  /// The kept predictions, for recomputing scores offline.
  PredictionSet prediction_set() const;
};

nlohmann::json to_json(const QuestionRecord& r);
QuestionRecord question_record_from_json(const nlohmann::json& j);

/// Samples n predictions, applies the consensus shortcut, and otherwise
/// scores the candidates with the complementary answer's vote.
///
/// A sample is dropped when its call fails or its reply has neither a
/// parseable letter nor usable option logits; a question left with no
/// predictions is marked failed. `wall_ms`, when given, receives the elapsed time.
QuestionRecord run_question(const QAItem& item, const RunConfig& cfg, const VotingSettings& voting,
                            VideoModel& video, TextModel& text, double* wall_ms = nullptr);

struct RunOutput {
  std::vector<QuestionRecord> records;  // sorted by question id
  std::vector<double> wall_ms;          // parallel to records
};

/// Runs every item on a pool of cfg.workers threads.
RunOutput run_dataset(const std::vector<QAItem>& items, const RunConfig& cfg, VideoModel& video, TextModel& text);

/// The backends a config names. For the sim backend both point at one
/// in-process world.
struct Backends {
  std::shared_ptr<const sim::World> world;  // sim only
  std::unique_ptr<VideoModel> video;
  std::unique_ptr<TextModel> text;
};

Backends make_backends(const RunConfig& cfg);

}  // namespace vsr
