#include "vsr/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "vsr/errors.hpp"
#include "vsr/rng.hpp"
#include "vsr/sim_backend.hpp"

namespace vsr {

using nlohmann::json;

PredictionSet QuestionRecord::prediction_set() const {
  PredictionSet set;
  set.question_id = id;
  set.n_options = n_options;
  set.n_requested = n_requested;
  for (const auto& s : samples) {
    if (!s.option) continue;
    Prediction p;
    p.sample_index = s.sample_index;
    p.schedule.seed = s.seed;
    p.option = *s.option;
    p.margin = s.margin;
    p.max_logit = s.max_logit;
    p.raw_text = s.raw_text;
    set.predictions.push_back(std::move(p));
  }
  return set;
}

namespace {

json label_or_null(const std::optional<OptionLabel>& l) { return l ? json(l->str()) : json(nullptr); }

std::optional<OptionLabel> label_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return OptionLabel::from_letter(j.get<std::string>());
}

}  // namespace

json to_json(const QuestionRecord& r) {
  json samples = json::array();
  for (const auto& s : r.samples) {
    json sj = {{"index", s.sample_index}, {"seed", s.seed}, {"option", label_or_null(s.option)}};
    if (s.option) {
      sj["margin"] = s.margin;
      sj["max_logit"] = s.max_logit;
    }
    sj["raw_text"] = s.raw_text;
    if (!s.error.empty()) sj["error"] = s.error;
    samples.push_back(std::move(sj));
  }
  json scores = json::array();
  for (const auto& o : r.scores)
    scores.push_back({{"label", o.label.str()}, {"s_f", o.s_f}, {"s_mc", o.s_mc}, {"s_v", o.s_v}, {"s_total", o.s_total}});
  return {{"id", r.id},
          {"truth", r.truth.str()},
          {"n_options", r.n_options},
          {"n_requested", r.n_requested},
          {"failed", r.failed},
          {"failure", r.failure},
          {"samples", std::move(samples)},
          {"consensus", r.consensus},
          {"majority", label_or_null(r.majority)},
          {"selected", label_or_null(r.selected)},
          {"correct", r.correct()},
          {"scores", std::move(scores)},
          {"category", r.category ? json(std::string(to_string(*r.category))) : json(nullptr)},
          {"category_parsed", r.category_parsed},
          {"complementary", label_or_null(r.complementary)},
          {"chosen_segment", r.chosen_segment ? json(*r.chosen_segment) : json(nullptr)},
          {"probe_scores", [&] {
             json a = json::array();
             for (double v : r.probe_scores) a.push_back(std::isfinite(v) ? json(v) : json(nullptr));
             return a;
           }()},
          {"calls",
           {{"sampling_video", r.sampling_video_calls},
            {"voting_video", r.voting_video_calls},
            {"text", r.text_calls}}}};
}

QuestionRecord question_record_from_json(const json& j) {
  try {
    QuestionRecord r;
    r.id = j.at("id").get<std::string>();
    r.truth = OptionLabel::from_letter(j.at("truth").get<std::string>());
    r.n_options = j.at("n_options").get<int>();
    r.n_requested = j.at("n_requested").get<int>();
    r.failed = j.at("failed").get<bool>();
    r.failure = j.at("failure").get<std::string>();
    for (const auto& sj : j.at("samples")) {
      SampleRecord s;
      s.sample_index = sj.at("index").get<int>();
      s.seed = sj.at("seed").get<std::uint64_t>();
      s.option = label_from(sj.at("option"));
      if (s.option) {
        s.margin = sj.at("margin").get<double>();
        s.max_logit = sj.at("max_logit").get<double>();
      }
      s.raw_text = sj.at("raw_text").get<std::string>();
      s.error = sj.value("error", std::string());
      r.samples.push_back(std::move(s));
    }
    r.consensus = j.at("consensus").get<bool>();
    r.majority = label_from(j.at("majority"));
    r.selected = label_from(j.at("selected"));
    for (const auto& oj : j.at("scores"))
      r.scores.push_back(OptionScore{OptionLabel::from_letter(oj.at("label").get<std::string>()),
                                     oj.at("s_f").get<double>(), oj.at("s_mc").get<double>(),
                                     oj.at("s_v").get<double>(), oj.at("s_total").get<double>()});
    if (const auto& c = j.at("category"); !c.is_null())
      r.category = c.get<std::string>() == "global" ? QuestionKind::Global : QuestionKind::Local;
    r.category_parsed = j.at("category_parsed").get<bool>();
    r.complementary = label_from(j.at("complementary"));
    if (const auto& t = j.at("chosen_segment"); !t.is_null()) r.chosen_segment = t.get<int>();
    for (const auto& v : j.at("probe_scores")) r.probe_scores.push_back(v.is_null() ? -INFINITY : v.get<double>());
    const auto& calls = j.at("calls");
    r.sampling_video_calls = calls.at("sampling_video").get<std::int64_t>();
    r.voting_video_calls = calls.at("voting_video").get<std::int64_t>();
    r.text_calls = calls.at("text").get<std::int64_t>();
    return r;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed question record: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw SchemaError(std::string("malformed question record: ") + e.what());
  }
}

QuestionRecord run_question(const QAItem& item, const RunConfig& cfg, const VotingSettings& voting,
                            VideoModel& video, TextModel& text, double* wall_ms) {
  const auto start = std::chrono::steady_clock::now();
  CountingVideoModel sampling_video(video);
  CountingVideoModel voting_video(video);
  CountingTextModel counted_text(text);

  QuestionRecord rec;
  rec.id = item.id;
  rec.truth = item.truth;
  rec.n_options = item.n_options();
  rec.n_requested = cfg.n_samples;

  bool all_transport = true;
  for (int i = 0; i < cfg.n_samples; ++i) {
    SampleRecord s;
    s.sample_index = i;
    s.seed = derive_sample_seed(cfg.seed, item.id, static_cast<std::uint64_t>(i));
    try {
      VideoQARequest req;
      req.video_id = item.video.video_id;
      req.question_id = item.id;
      req.task = VideoTask::Answer;
      req.frame_indices = sample_frames(cfg.strategy, item.video, cfg.frames_per_sample, s.seed).indices;
      req.question_text = item.question;
      req.options = item.options;
      req.want_logits = true;
      const auto resp = sampling_video.video_qa(req);
      s.raw_text = resp.raw_text;
      if (resp.option_logits.size() < 2) {
        s.error = "MissingLogits";
      } else if (auto option = resolve_answer(resp, item.n_options())) {
        const auto m = extract_margin(resp);
        s.option = option;
        s.margin = m.margin;
        s.max_logit = m.max_logit;
      } else {
        s.error = "Unparseable";
      }
    } catch (const Error& e) {
      s.error = e.kind();
    }
    if (!s.option && s.error != "TransportError") all_transport = false;
    rec.samples.push_back(std::move(s));
  }

  const auto set = rec.prediction_set();
  if (set.predictions.empty()) {
    rec.failed = true;
    rec.failure = all_transport ? "TransportError" : "NoUsablePredictions";
  } else {
    rec.majority = majority_answer(set);
    if (auto unanimous = consensus_shortcut(set)) {
      rec.consensus = true;
      rec.selected = unanimous;
    } else {
      const auto comp = complementary_answer(item, voting_video, counted_text, voting);
      rec.category = comp.category.kind;
      rec.category_parsed = comp.category.parsed;
      rec.complementary = comp.answer;
      if (comp.refocus) {
        rec.chosen_segment = comp.refocus->chosen_segment;
        rec.probe_scores = comp.refocus->probe_scores;
      }
      const auto breakdown = combine_and_select(set, cfg.scoring, voting_score(set, comp.answer));
      rec.scores = breakdown.options;
      rec.selected = breakdown.selected;
    }
  }
  rec.sampling_video_calls = sampling_video.calls();
  rec.voting_video_calls = voting_video.calls();
  rec.text_calls = counted_text.calls();
  if (wall_ms)
    *wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

RunOutput run_dataset(const std::vector<QAItem>& items, const RunConfig& cfg, VideoModel& video, TextModel& text) {
  cfg.validate();
  const auto voting = cfg.voting_settings();
  std::vector<QuestionRecord> records(items.size());
  std::vector<double> wall(items.size(), 0.0);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const auto i = next.fetch_add(1);
      if (i >= items.size()) return;
      try {
        records[i] = run_question(items[i], cfg, voting, video, text, &wall[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(items.size());
        return;
      }
    }
  };
  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), std::max<std::size_t>(items.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return records[a].id < records[b].id; });
  RunOutput out;
  out.records.reserve(items.size());
  out.wall_ms.reserve(items.size());
  for (auto i : order) {
    out.records.push_back(std::move(records[i]));
    out.wall_ms.push_back(wall[i]);
  }
  return out;
}

Backends make_backends(const RunConfig& cfg) {
  Backends b;
  if (cfg.backend.kind == BackendKind::Sim) {
    b.world = std::make_shared<const sim::World>(sim::load_world(cfg.backend.world));
    b.video = std::make_unique<sim::SimBackend>(b.world);
    b.text = std::make_unique<sim::SimBackend>(b.world);
  } else {
    b.video = std::make_unique<HttpBackend>(cfg.backend.video_endpoint, cfg.backend.http);
    b.text = std::make_unique<HttpBackend>(cfg.backend.text_endpoint, cfg.backend.http);
  }
  return b;
}

}  // namespace vsr
