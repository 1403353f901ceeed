#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vsr/clients.hpp"
#include "vsr/dataset.hpp"
#include "vsr/prompts.hpp"
#include "vsr/protocol.hpp"

namespace vsr {

enum class QuestionKind { Global, Local };

std::string_view to_string(QuestionKind k);

struct QuestionCategory {
  QuestionKind kind = QuestionKind::Local;
  std::string rationale;  // the LM's full reply
  bool parsed = false;    // false when the reply named neither kind
};

/// How refocus probes rank segments.
enum class ProbeScore { YesLogit, YesMinusNo };

struct VotingSettings {
  int segments = 8;
  int frames_per_segment = 32;
  ProbeScore probe_score = ProbeScore::YesLogit;
  PromptSet prompts = PromptSet::builtin();
};

/// Asks the text model whether the question is GLOBAL or LOCAL; the first
/// of the two tokens in the reply wins. Anything else falls back to Local
/// with a warning. Transport errors propagate.
QuestionCategory categorize(const QAItem& question, TextModel& lm, const PromptSet& prompts);

struct NarrationResult {
  std::string key_info;
  std::vector<std::string> clues;  // one per segment
  std::string summary;             // the LM's final reply
  std::optional<OptionLabel> answer;
};

/// Key-information query, one narration per segment, then a text-only
/// answer over all clues. Issues segments video calls and two text calls.
/// Backend failures leave `answer` empty instead of throwing.
NarrationResult narrate_and_answer(const QAItem& question, VideoModel& video, TextModel& lm,
                                   const VotingSettings& settings);

struct RefocusResult {
  std::string localization_question;
  std::vector<double> probe_scores;  // per segment; -inf for failed probes
  std::optional<int> chosen_segment;
  std::optional<OptionLabel> answer;
};

/// Index of the largest score, ties to the smallest index. Empty input gives 0.
int argmax_segment(const std::vector<double>& scores);

/// Rewrites the question as a yes/no probe, scores every segment, then
/// answers the original question from the best segment's frames. Issues
/// segments + 1 video calls and one text call. Backend failures leave
/// `answer` empty instead of throwing.
RefocusResult refocus_and_answer(const QAItem& question, VideoModel& video, TextModel& lm,
                                 const VotingSettings& settings);

struct ComplementaryAnswer {
  QuestionCategory category;
  std::optional<OptionLabel> answer;
  std::optional<NarrationResult> narration;
  std::optional<RefocusResult> refocus;
};

/// Categorizes, then narrates (global) or refocuses (local). Never throws
/// for backend failures; the answer is simply empty.
ComplementaryAnswer complementary_answer(const QAItem& question, VideoModel& video, TextModel& lm,
                                         const VotingSettings& settings);

}  // namespace vsr
