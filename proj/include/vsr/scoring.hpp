#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vsr/protocol.hpp"
#include "vsr/sampling.hpp"

namespace vsr {

/// One sampled inference for a question.
struct Prediction {
  int sample_index = 0;
  FrameSchedule schedule;
  OptionLabel option;
  double margin = 0.0;     // l_max - l_second within this sample, >= 0
  double max_logit = 0.0;  // l_max
  std::string raw_text;
};

/// The predictions kept for one question, sorted by sample_index.
struct PredictionSet {
  std::string question_id;
  int n_options = 4;
  int n_requested = 0;
  std::vector<Prediction> predictions;

  /// Checks ordering, uniqueness, option range and non-negative margins.
  void validate() const;
};

/// How a sample's confidence is measured (intra) and aggregated across the
/// samples that predicted the same option (inter).
enum class IntraConfidence { Marginal, MaxLogit };
enum class InterAggregate { Max, Mean };

struct ConfidenceVariant {
  IntraConfidence intra = IntraConfidence::Marginal;
  InterAggregate inter = InterAggregate::Max;
  friend bool operator==(const ConfidenceVariant&, const ConfidenceVariant&) = default;
};

std::string to_string(ConfidenceVariant v);
/// Parses "marginal:max", "maxlogit:mean", ...
ConfidenceVariant parse_confidence_variant(std::string_view s);

using OptionScores = std::map<OptionLabel, double>;

/// Share of predictions choosing each observed option. Throws EmptySet.
OptionScores frequency_score(const PredictionSet& set);

/// Per observed option, the aggregated confidence of the samples that chose it.
/// Options with no supporting sample are absent (read as 0).
OptionScores marginal_confidence_score(const PredictionSet& set, ConfidenceVariant variant = {});

/// 1 for the complementary answer, 0 for every other option of the question.
/// All zeros when the complementary answer is missing or out of range.
OptionScores voting_score(const PredictionSet& set, std::optional<OptionLabel> complementary);

struct ScoringParams {
  double alpha = 1.0;
  double beta = 3.0;
  ConfidenceVariant confidence;
  /// When true only options that appear in the prediction set can win;
  /// otherwise an option named only by the complementary answer competes too.
  bool restrict_to_sampled = false;
};

struct OptionScore {
  OptionLabel label;
  double s_f = 0.0;
  double s_mc = 0.0;
  double s_v = 0.0;
  double s_total = 0.0;
};

struct ScoreBreakdown {
  std::vector<OptionScore> options;  // candidates, ascending by label
  OptionLabel selected;
  bool consensus = false;

  const OptionScore* find(OptionLabel label) const;
};

/// S = S^f + alpha*S^mc + beta*S^v over the candidates, argmax with ties
/// broken by higher S^f and then the smaller label.
ScoreBreakdown combine_and_select(const PredictionSet& set, const ScoringParams& params,
                                  const OptionScores& s_v);

/// The unanimous option, or nullopt when predictions disagree. Throws EmptySet.
std::optional<OptionLabel> consensus_shortcut(const PredictionSet& set);

/// Most frequent option, ties to the smaller label. Throws EmptySet.
OptionLabel majority_answer(const PredictionSet& set);

/// Fraction of questions whose first n samples (sample_index < n) contain
/// the truth. Throws LengthMismatch when sizes differ or are zero and
/// InvalidArgument when n exceeds a set's n_requested.
double pass_at_n(const std::vector<PredictionSet>& sets, const std::vector<OptionLabel>& truths, int n);

}  // namespace vsr
