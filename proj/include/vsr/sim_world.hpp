#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vsr/dataset.hpp"
#include "vsr/sampling.hpp"

namespace vsr::sim {

inline constexpr int kWorldSchemaVersion = 1;

struct NormalDist {
  double mean = 0.0;
  double stddev = 0.0;
};

struct ProbePolicy {
  double yes_logit_hit = 4.0;
  double yes_logit_miss = -2.0;
  double noise_stddev = 0.0;
};

/// How the simulated video model answers.
struct SimPolicy {
  double p_correct_given_coverage = 0.9;
  double p_correct_given_miss = 0.2;
  NormalDist margin_when_correct{3.0, 1.0};
  NormalDist margin_when_wrong{1.0, 0.7};
  double base_logit = 12.0;
  ProbePolicy probe;

  /// Throws SchemaError naming the offending field.
  void validate() const;
};

struct Event {
  std::string token;  // appears verbatim in narrations
  std::int64_t lo = 0;
  std::int64_t hi = 0;  // half-open
};

struct SimVideo {
  VideoMeta meta;
  std::vector<Event> events;
};

struct SimQuestion {
  std::string id;
  std::string video_id;
  std::string question;  // unique within a world; the text LM looks questions up by it
  std::vector<std::string> options;
  OptionLabel truth;
  DeclaredType category = DeclaredType::Local;
  std::vector<std::string> key_events;  // tokens of events on the same video
  /// When set, each answer is correct with this probability regardless of
  /// which frames were requested (the independent-sample model).
  std::optional<double> p_correct;
  /// Relative weights over the wrong options in label order; uniform when empty.
  std::vector<double> distractor_weights;
};

/// A deterministic synthetic world: videos with labelled events and
/// questions whose correct option depends on those events.
///
/// A frame set covers a question when every key event contains at least one
/// requested frame. Answers are correct with p_correct_given_coverage when
/// covered and p_correct_given_miss otherwise, unless the question pins
/// p_correct. Yes/no probes are answered from whether any key event is
/// visible. Narrations list the tokens of every visible event.
class World {
 public:
  std::uint64_t seed = 0;
  SimPolicy policy;
  std::vector<SimVideo> videos;
  std::vector<SimQuestion> questions;

  /// Checks every invariant and builds the lookup indices. Must be called
  /// after mutating the public fields; from_json and the generators do it.
  void finalize();

  const SimVideo& video(const std::string& id) const;          // throws UnknownVideo
  const SimQuestion& question(const std::string& id) const;    // throws UnknownQuestion
  const SimQuestion* find_question_by_text(const std::string& text) const;
  const Event& event(const SimVideo& v, const std::string& token) const;

  /// The questions as dataset items, in world order.
  std::vector<QAItem> dataset() const;

 private:
  std::map<std::string, std::size_t> video_index_;
  std::map<std::string, std::size_t> question_index_;
  std::map<std::string, std::size_t> text_index_;
};

World world_from_json(const nlohmann::json& j);  // throws SchemaError naming the field
nlohmann::json to_json(const World& w);
World load_world(const std::filesystem::path& path);
void save_world(const std::filesystem::path& path, const World& w);

struct GeneratorParams {
  std::uint64_t seed = 20250101;
  int n_questions = 2000;
  int n_options = 4;
  double fraction_global = 0.5;
  /// Segments and per-sample frames the events are laid out against.
  int segments = 8;
  int frames_per_sample = 32;
  double min_duration_s = 600;
  double max_duration_s = 3600;
  double fps = 30;
  /// Key-event length as a fraction of one sampling bin (n_frames / frames_per_sample).
  double min_event_bins = 0.15;
  double max_event_bins = 1.0;
  int min_global_events = 2;
  int max_global_events = 3;
  int background_events = 3;
  /// Probability that a question has one dominant wrong option.
  double p_sticky_distractor = 0.3;
  double sticky_weight = 4.0;
  /// When set, every question pins p_correct drawn uniformly from this range.
  std::optional<std::pair<double, double>> p_correct_range;
  SimPolicy policy;
};

/// Deterministic world generator. Each key event lies inside one segment;
/// a global question's events lie in distinct segments.
World generate_world(const GeneratorParams& params);

/// Informative margins, locatable events, mixed global and local questions.
GeneratorParams reference_preset();
/// Every question pins p_correct uniformly in [lo, hi].
GeneratorParams independent_preset(double lo, double hi);
/// Local questions only, events of at least one bin, noiseless probes,
/// always correct when covered.
GeneratorParams localization_preset();

/// Exact probability that one bin-wise schedule of k frames over n_frames
/// hits every range in `ranges` (each range needs at least one frame).
/// Dynamic programming over bins and the set of ranges hit so far; supports
/// up to 16 ranges.
double bin_wise_coverage_probability(std::int64_t n_frames, std::int64_t k,
                                     const std::vector<std::pair<std::int64_t, std::int64_t>>& ranges);

/// Per-sample probability of a correct answer for `q` under bin-wise sampling
/// with k frames, from the policy and the coverage probability.
double per_sample_accuracy(const World& w, const SimQuestion& q, std::int64_t k);

/// 1 - (1 - q)^n: coverage of n independent samples each correct with probability q.
double closed_form_pass_at_n(double q, int n);

}  // namespace vsr::sim
