#include "vsr/sim_backend.hpp"

#include <algorithm>
#include <cmath>

#include "vsr/errors.hpp"
#include "vsr/prompts.hpp"
#include "vsr/rng.hpp"

namespace vsr::sim {

namespace {

bool any_frame_in(const std::vector<std::int64_t>& frames, const Event& e) {
  return std::any_of(frames.begin(), frames.end(), [&](std::int64_t f) { return f >= e.lo && f < e.hi; });
}

std::uint64_t request_seed(const World& world, const VideoQARequest& req) {
  return SeedHasher(world.seed)
      .add(req.video_id)
      .add(req.question_id)
      .add(to_string(req.task))
      .add(std::span<const std::int64_t>(req.frame_indices))
      .digest();
}

OptionLabel draw_distractor(const SimQuestion& q, Xoshiro256& rng) {
  const int n = static_cast<int>(q.options.size());
  std::vector<OptionLabel> wrong;
  for (int i = 0; i < n; ++i)
    if (i != q.truth.index()) wrong.emplace_back(i);
  if (q.distractor_weights.empty()) return wrong[rng.bounded(wrong.size())];
  double total = 0.0;
  for (double w : q.distractor_weights) total += w;
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < wrong.size(); ++i) {
    if (u < q.distractor_weights[i]) return wrong[i];
    u -= q.distractor_weights[i];
  }
  // Rounding left u at the top edge; return the last option with weight.
  for (std::size_t i = wrong.size(); i-- > 0;)
    if (q.distractor_weights[i] > 0) return wrong[i];
  return wrong.back();
}

VideoQAResponse answer(const VideoQARequest& req, const World& world, const SimVideo& video, Xoshiro256& rng) {
  const auto& q = world.question(req.question_id);
  if (q.video_id != video.meta.video_id)
    throw ProtocolError("question " + q.id + " does not belong to video " + video.meta.video_id);
  if (req.options.size() != q.options.size())
    throw ProtocolError("request for " + q.id + " carries " + std::to_string(req.options.size()) +
                        " options, the question has " + std::to_string(q.options.size()));

  double p = 0.0;
  if (q.p_correct) {
    p = *q.p_correct;
  } else {
    bool covered = !q.key_events.empty();
    for (const auto& token : q.key_events) covered = covered && any_frame_in(req.frame_indices, world.event(video, token));
    p = covered ? world.policy.p_correct_given_coverage : world.policy.p_correct_given_miss;
  }
  const bool correct = rng.uniform() < p;
  const OptionLabel chosen = correct ? q.truth : draw_distractor(q, rng);
  const auto& dist = correct ? world.policy.margin_when_correct : world.policy.margin_when_wrong;
  const double margin = std::max(0.0, rng.normal(dist.mean, dist.stddev));
  const double top = world.policy.base_logit + rng.normal();

  VideoQAResponse resp;
  resp.raw_text = std::string("The answer is (") + chosen.letter() + ").";
  if (req.want_logits) {
    const int n = static_cast<int>(q.options.size());
    // Runner-up drawn uniformly from the other options; the rest trail it.
    int runner_up = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(n - 1)));
    if (runner_up >= chosen.index()) ++runner_up;
    for (int i = 0; i < n; ++i) {
      double logit;
      if (i == chosen.index()) logit = top;
      else if (i == runner_up) logit = top - margin;
      else logit = top - margin - (0.5 + 2.0 * rng.uniform());
      resp.option_logits[OptionLabel(i)] = logit;
    }
  }
  return resp;
}

VideoQAResponse probe(const VideoQARequest& req, const World& world, const SimVideo& video, Xoshiro256& rng) {
  const auto& q = world.question(req.question_id);
  bool hit = false;
  for (const auto& token : q.key_events) hit = hit || any_frame_in(req.frame_indices, world.event(video, token));
  const auto& pp = world.policy.probe;
  const double yes = (hit ? pp.yes_logit_hit : pp.yes_logit_miss) + pp.noise_stddev * rng.normal();
  VideoQAResponse resp;
  resp.raw_text = yes >= 0.0 ? "Yes" : "No";
  if (req.want_logits) {
    resp.yes_logit = yes;
    resp.no_logit = -yes;
    if (req.options.size() == 2) {
      resp.option_logits[OptionLabel(0)] = yes;
      resp.option_logits[OptionLabel(1)] = -yes;
    }
  }
  return resp;
}

VideoQAResponse narrate(const VideoQARequest& req, const SimVideo& video) {
  std::string clues;
  for (const auto& e : video.events) {
    if (!any_frame_in(req.frame_indices, e)) continue;
    if (!clues.empty()) clues += ", ";
    clues += e.token;
  }
  VideoQAResponse resp;
  resp.raw_text = clues.empty() ? "NONE" : "Visible: " + clues;
  return resp;
}

// Text of the line following `label`, e.g. "Question: ".
std::optional<std::string> line_after(std::string_view text, std::string_view label) {
  std::size_t pos = 0;
  while ((pos = text.find(label, pos)) != std::string_view::npos) {
    if (pos == 0 || text[pos - 1] == '\n') {
      const auto start = pos + label.size();
      const auto end = text.find('\n', start);
      return std::string(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
    }
    pos += label.size();
  }
  return std::nullopt;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

VideoQAResponse sim_video_qa(const VideoQARequest& req, const World& world) {
  const auto& video = world.video(req.video_id);
  for (auto f : req.frame_indices)
    if (f < 0 || f >= video.meta.n_frames)
      throw ProtocolError("frame index " + std::to_string(f) + " outside video " + req.video_id);
  Xoshiro256 rng(request_seed(world, req));
  switch (req.task) {
    case VideoTask::Answer: return answer(req, world, video, rng);
    case VideoTask::Probe: return probe(req, world, video, rng);
    case VideoTask::Narrate: return narrate(req, video);
  }
  throw ProtocolError("unknown task");
}

TextLMResponse sim_text_lm(const TextLMRequest& req, const World& world) {
  const auto task = prompt_task(req.prompt);
  if (!task) throw UnrecognizedPrompt("prompt has no task header");
  const auto question_line = line_after(req.prompt, "Question: ");
  if (!question_line) throw UnrecognizedPrompt("prompt has no question line");
  const SimQuestion* q = world.find_question_by_text(*question_line);
  if (!q) throw UnrecognizedPrompt("prompt question is not in the world: " + *question_line);

  if (*task == "categorize") {
    const bool global = q->category == DeclaredType::Global;
    return {global ? "GLOBAL\nThe question needs the whole video." : "LOCAL\nThe question concerns one moment."};
  }
  if (*task == "keyinfo") {
    return {q->key_events.empty() ? "Nothing specific." : "Look for " + join(q->key_events, " and ") + "."};
  }
  if (*task == "localize") {
    return {"Is the video showing " + (q->key_events.empty() ? std::string("the scene") : join(q->key_events, " and ")) +
            "?"};
  }
  if (*task == "summarize") {
    const auto begin = req.prompt.find("Clues:\n");
    const auto end = req.prompt.find("End of clues.");
    if (begin == std::string::npos || end == std::string::npos || end < begin)
      throw UnrecognizedPrompt("summarize prompt without a clue block");
    const std::string_view clues = std::string_view(req.prompt).substr(begin, end - begin);
    const bool all_seen = !q->key_events.empty() &&
                          std::all_of(q->key_events.begin(), q->key_events.end(), [&](const std::string& t) {
                            return clues.find(t) != std::string_view::npos;
                          });
    if (!all_seen) return {"INSUFFICIENT EVIDENCE"};
    return {std::string("The answer is (") + q->truth.letter() + ")."};
  }
  throw UnrecognizedPrompt("unknown prompt task '" + *task + "'");
}

}  // namespace vsr::sim
