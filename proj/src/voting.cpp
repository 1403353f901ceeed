#include "vsr/voting.hpp"

#include <cmath>

#include "vsr/errors.hpp"
#include "vsr/log.hpp"
#include "vsr/sampling.hpp"

namespace vsr {

std::string_view to_string(QuestionKind k) { return k == QuestionKind::Global ? "global" : "local"; }

namespace {

bool is_backend_failure(const Error& e) {
  return dynamic_cast<const TransportError*>(&e) || dynamic_cast<const ProtocolError*>(&e) ||
         dynamic_cast<const BackendError*>(&e) || dynamic_cast<const MissingLogits*>(&e);
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string ask(TextModel& lm, std::string prompt) { return lm.complete(TextLMRequest{std::move(prompt), {}}).text; }

void check_settings(const VotingSettings& s) {
  if (s.segments < 1) throw InvalidArgument("voting needs at least one segment");
  if (s.frames_per_segment < 1) throw InvalidArgument("voting needs at least one frame per segment");
}

}  // namespace

QuestionCategory categorize(const QAItem& question, TextModel& lm, const PromptSet& prompts) {
  const auto reply = ask(lm, render_prompt(prompts.categorize, {{"question", question.question},
                                                                {"options", format_options(question.options)}}));
  QuestionCategory out;
  out.rationale = reply;
  const auto g = reply.find("GLOBAL");
  const auto l = reply.find("LOCAL");
  if (g == std::string::npos && l == std::string::npos) {
    log::warn("question " + question.id + ": category reply names neither GLOBAL nor LOCAL; using LOCAL");
    return out;
  }
  out.parsed = true;
  out.kind = g < l ? QuestionKind::Global : QuestionKind::Local;
  return out;
}

NarrationResult narrate_and_answer(const QAItem& question, VideoModel& video, TextModel& lm,
                                   const VotingSettings& settings) {
  check_settings(settings);
  NarrationResult out;
  try {
    out.key_info = trim(ask(lm, render_prompt(settings.prompts.keyinfo, {{"question", question.question}})));
    const auto segments = split_segments(question.video, settings.segments);
    out.clues.reserve(segments.size());
    std::string clue_block;
    for (const auto& seg : segments) {
      VideoQARequest req;
      req.video_id = question.video.video_id;
      req.question_id = question.id;
      req.task = VideoTask::Narrate;
      req.frame_indices = segment_uniform_sample(seg, settings.frames_per_segment).indices;
      req.question_text = render_prompt(settings.prompts.narrate,
                                        {{"segment_index", std::to_string(seg.index + 1)},
                                         {"segment_count", std::to_string(segments.size())},
                                         {"key_info", out.key_info}});
      req.want_logits = false;
      out.clues.push_back(trim(video.video_qa(req).raw_text));
      if (!clue_block.empty()) clue_block += '\n';
      clue_block += "Segment " + std::to_string(seg.index + 1) + ": " + out.clues.back();
    }
    out.summary = ask(lm, render_prompt(settings.prompts.summarize,
                                        {{"segment_count", std::to_string(segments.size())},
                                         {"clues", clue_block},
                                         {"question", question.question},
                                         {"options", format_options(question.options)}}));
    out.answer = parse_option(out.summary, question.n_options());
  } catch (const Error& e) {
    if (!is_backend_failure(e)) throw;
    log::warn("question " + question.id + ": narration failed: " + e.what());
    out.answer.reset();
  }
  return out;
}

int argmax_segment(const std::vector<double>& scores) {
  int best = 0;
  for (int t = 1; t < static_cast<int>(scores.size()); ++t)
    if (scores[t] > scores[best]) best = t;
  return best;
}

RefocusResult refocus_and_answer(const QAItem& question, VideoModel& video, TextModel& lm,
                                 const VotingSettings& settings) {
  check_settings(settings);
  RefocusResult out;
  try {
    out.localization_question =
        trim(ask(lm, render_prompt(settings.prompts.localize, {{"question", question.question}})));
  } catch (const Error& e) {
    if (!is_backend_failure(e)) throw;
    log::warn("question " + question.id + ": localization rewrite failed: " + e.what());
    return out;
  }

  const auto segments = split_segments(question.video, settings.segments);
  out.probe_scores.assign(segments.size(), -INFINITY);
  for (const auto& seg : segments) {
    VideoQARequest req;
    req.video_id = question.video.video_id;
    req.question_id = question.id;
    req.task = VideoTask::Probe;
    req.frame_indices = segment_uniform_sample(seg, settings.frames_per_segment).indices;
    req.question_text = out.localization_question;
    req.options = {"Yes", "No"};
    req.want_logits = true;
    try {
      const auto resp = video.video_qa(req);
      if (resp.yes_logit) {
        double score = *resp.yes_logit;
        if (settings.probe_score == ProbeScore::YesMinusNo) score -= resp.no_logit.value_or(0.0);
        if (std::isfinite(score)) out.probe_scores[seg.index] = score;
      }
    } catch (const Error& e) {
      if (!is_backend_failure(e)) throw;
      log::warn("question " + question.id + ": probe of segment " + std::to_string(seg.index) +
                " failed: " + e.what());
    }
  }

  const int chosen = argmax_segment(out.probe_scores);
  out.chosen_segment = chosen;
  VideoQARequest req;
  req.video_id = question.video.video_id;
  req.question_id = question.id;
  req.task = VideoTask::Answer;
  req.frame_indices = segment_uniform_sample(segments[chosen], settings.frames_per_segment).indices;
  req.question_text = question.question;
  req.options = question.options;
  req.want_logits = true;
  try {
    out.answer = resolve_answer(video.video_qa(req), question.n_options());
  } catch (const Error& e) {
    if (!is_backend_failure(e)) throw;
    log::warn("question " + question.id + ": refocused answer failed: " + e.what());
  }
  return out;
}

ComplementaryAnswer complementary_answer(const QAItem& question, VideoModel& video, TextModel& lm,
                                         const VotingSettings& settings) {
  ComplementaryAnswer out;
  try {
    out.category = categorize(question, lm, settings.prompts);
  } catch (const Error& e) {
    if (!is_backend_failure(e)) throw;
    log::warn("question " + question.id + ": categorization failed: " + e.what());
    return out;
  }
  if (out.category.kind == QuestionKind::Global) {
    out.narration = narrate_and_answer(question, video, lm, settings);
    out.answer = out.narration->answer;
  } else {
    out.refocus = refocus_and_answer(question, video, lm, settings);
    out.answer = out.refocus->answer;
  }
  return out;
}

}  // namespace vsr
