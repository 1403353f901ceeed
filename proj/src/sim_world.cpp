#include "vsr/sim_world.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "vsr/errors.hpp"
#include "vsr/rng.hpp"

namespace vsr::sim {

using nlohmann::json;

namespace {

void require_probability(double p, const std::string& name) {
  if (!(p >= 0.0 && p <= 1.0)) throw SchemaError(name + " must lie in [0, 1]");
}

void require_dist(const NormalDist& d, const std::string& name) {
  if (!std::isfinite(d.mean) || !(d.stddev >= 0.0) || !std::isfinite(d.stddev))
    throw SchemaError(name + " needs a finite mean and a non-negative stddev");
}

// Accessors that name the failing field in SchemaError messages.
const json& at(const json& j, const std::string& path, const char* key) {
  if (!j.is_object()) throw SchemaError(path + " must be an object");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError("missing field " + path + "." + key);
  return *it;
}

template <typename T>
T get(const json& j, const std::string& path, const char* key) {
  const auto& v = at(j, path, key);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw SchemaError("field " + path + "." + key + " has the wrong type");
  }
}

template <typename T>
T get_or(const json& j, const std::string& path, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return get<T>(j, path, key);
}

NormalDist dist_from(const json& j, const std::string& path) {
  return NormalDist{get<double>(j, path, "mean"), get<double>(j, path, "stddev")};
}

json dist_json(const NormalDist& d) { return {{"mean", d.mean}, {"stddev", d.stddev}}; }

}  // namespace

void SimPolicy::validate() const {
  require_probability(p_correct_given_coverage, "policy.p_correct_given_coverage");
  require_probability(p_correct_given_miss, "policy.p_correct_given_miss");
  require_dist(margin_when_correct, "policy.margin_when_correct");
  require_dist(margin_when_wrong, "policy.margin_when_wrong");
  if (!std::isfinite(base_logit)) throw SchemaError("policy.base_logit must be finite");
  if (!std::isfinite(probe.yes_logit_hit) || !std::isfinite(probe.yes_logit_miss))
    throw SchemaError("policy.probe yes logits must be finite");
  if (!(probe.noise_stddev >= 0.0)) throw SchemaError("policy.probe.noise_stddev must be non-negative");
}

void World::finalize() {
  policy.validate();
  video_index_.clear();
  question_index_.clear();
  text_index_.clear();
  for (std::size_t i = 0; i < videos.size(); ++i) {
    const auto& v = videos[i];
    const std::string path = "videos[" + std::to_string(i) + "]";
    if (v.meta.video_id.empty()) throw SchemaError(path + ".video_id is empty");
    try {
      v.meta.validate();
    } catch (const InvalidArgument& e) {
      throw SchemaError(path + ": " + e.what());
    }
    if (!video_index_.emplace(v.meta.video_id, i).second)
      throw SchemaError(path + ".video_id '" + v.meta.video_id + "' is duplicated");
    std::set<std::string> tokens;
    for (std::size_t e = 0; e < v.events.size(); ++e) {
      const auto& ev = v.events[e];
      const std::string epath = path + ".events[" + std::to_string(e) + "]";
      if (ev.token.empty()) throw SchemaError(epath + ".token is empty");
      if (!tokens.insert(ev.token).second) throw SchemaError(epath + ".token '" + ev.token + "' is duplicated");
      if (ev.lo < 0 || ev.hi <= ev.lo || ev.hi > v.meta.n_frames)
        throw SchemaError(epath + " range must satisfy 0 <= lo < hi <= n_frames");
    }
  }
  for (std::size_t i = 0; i < questions.size(); ++i) {
    const auto& q = questions[i];
    const std::string path = "questions[" + std::to_string(i) + "]";
    if (q.id.empty()) throw SchemaError(path + ".id is empty");
    if (!question_index_.emplace(q.id, i).second) throw SchemaError(path + ".id '" + q.id + "' is duplicated");
    auto vit = video_index_.find(q.video_id);
    if (vit == video_index_.end()) throw SchemaError(path + ".video_id '" + q.video_id + "' is not a world video");
    if (q.question.empty() || q.question.find('\n') != std::string::npos)
      throw SchemaError(path + ".question must be a single non-empty line");
    if (!text_index_.emplace(q.question, i).second)
      throw SchemaError(path + ".question text is duplicated");
    if (q.options.size() < 2 || q.options.size() > 6) throw SchemaError(path + ".options must have 2 to 6 entries");
    if (q.truth.index() < 0 || q.truth.index() >= static_cast<int>(q.options.size()))
      throw SchemaError(path + ".answer is outside the options");
    const auto& video = videos[vit->second];
    for (const auto& token : q.key_events) {
      const bool found = std::any_of(video.events.begin(), video.events.end(),
                                     [&](const Event& e) { return e.token == token; });
      if (!found) throw SchemaError(path + ".key_events names unknown event '" + token + "'");
    }
    if (q.p_correct) require_probability(*q.p_correct, path + ".p_correct");
    if (!q.distractor_weights.empty()) {
      if (q.distractor_weights.size() + 1 != q.options.size())
        throw SchemaError(path + ".distractor_weights needs one weight per wrong option");
      double sum = 0;
      for (double w : q.distractor_weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw SchemaError(path + ".distractor_weights must be non-negative");
        sum += w;
      }
      if (!(sum > 0.0)) throw SchemaError(path + ".distractor_weights must not all be zero");
    }
  }
}

const SimVideo& World::video(const std::string& id) const {
  auto it = video_index_.find(id);
  if (it == video_index_.end()) throw UnknownVideo(id);
  return videos[it->second];
}

const SimQuestion& World::question(const std::string& id) const {
  auto it = question_index_.find(id);
  if (it == question_index_.end()) throw UnknownQuestion(id);
  return questions[it->second];
}

const SimQuestion* World::find_question_by_text(const std::string& text) const {
  auto it = text_index_.find(text);
  return it == text_index_.end() ? nullptr : &questions[it->second];
}

const Event& World::event(const SimVideo& v, const std::string& token) const {
  for (const auto& e : v.events)
    if (e.token == token) return e;
  throw SchemaError("video " + v.meta.video_id + " has no event " + token);
}

std::vector<QAItem> World::dataset() const {
  std::vector<QAItem> out;
  out.reserve(questions.size());
  for (const auto& q : questions) {
    QAItem item;
    item.id = q.id;
    item.video = video(q.video_id).meta;
    item.question = q.question;
    item.options = q.options;
    item.truth = q.truth;
    item.declared_type = q.category;
    out.push_back(std::move(item));
  }
  return out;
}

World world_from_json(const json& j) {
  World w;
  const auto version = get<int>(j, "world", "schema_version");
  if (version != kWorldSchemaVersion)
    throw SchemaError("world.schema_version " + std::to_string(version) + " is not supported");
  w.seed = get<std::uint64_t>(j, "world", "seed");

  const auto& p = at(j, "world", "policy");
  w.policy.p_correct_given_coverage = get<double>(p, "policy", "p_correct_given_coverage");
  w.policy.p_correct_given_miss = get<double>(p, "policy", "p_correct_given_miss");
  w.policy.margin_when_correct = dist_from(at(p, "policy", "margin_when_correct"), "policy.margin_when_correct");
  w.policy.margin_when_wrong = dist_from(at(p, "policy", "margin_when_wrong"), "policy.margin_when_wrong");
  w.policy.base_logit = get_or<double>(p, "policy", "base_logit", w.policy.base_logit);
  if (p.contains("probe")) {
    const auto& pr = at(p, "policy", "probe");
    w.policy.probe.yes_logit_hit = get<double>(pr, "policy.probe", "yes_logit_hit");
    w.policy.probe.yes_logit_miss = get<double>(pr, "policy.probe", "yes_logit_miss");
    w.policy.probe.noise_stddev = get_or<double>(pr, "policy.probe", "noise_stddev", 0.0);
  }

  const auto& videos = at(j, "world", "videos");
  if (!videos.is_array()) throw SchemaError("world.videos must be an array");
  for (std::size_t i = 0; i < videos.size(); ++i) {
    const std::string path = "videos[" + std::to_string(i) + "]";
    const auto& vj = videos[i];
    SimVideo v;
    v.meta.video_id = get<std::string>(vj, path, "video_id");
    v.meta.n_frames = get<std::int64_t>(vj, path, "n_frames");
    v.meta.fps = get<double>(vj, path, "fps");
    const auto& events = at(vj, path, "events");
    if (!events.is_array()) throw SchemaError(path + ".events must be an array");
    for (std::size_t e = 0; e < events.size(); ++e) {
      const std::string epath = path + ".events[" + std::to_string(e) + "]";
      v.events.push_back(Event{get<std::string>(events[e], epath, "token"), get<std::int64_t>(events[e], epath, "lo"),
                               get<std::int64_t>(events[e], epath, "hi")});
    }
    w.videos.push_back(std::move(v));
  }

  const auto& questions = at(j, "world", "questions");
  if (!questions.is_array()) throw SchemaError("world.questions must be an array");
  for (std::size_t i = 0; i < questions.size(); ++i) {
    const std::string path = "questions[" + std::to_string(i) + "]";
    const auto& qj = questions[i];
    SimQuestion q;
    q.id = get<std::string>(qj, path, "id");
    q.video_id = get<std::string>(qj, path, "video_id");
    q.question = get<std::string>(qj, path, "question");
    q.options = get<std::vector<std::string>>(qj, path, "options");
    const auto answer = get<std::string>(qj, path, "answer");
    if (answer.size() != 1 || answer[0] < 'A' || answer[0] > 'Z')
      throw SchemaError(path + ".answer must be a single option letter");
    q.truth = OptionLabel(answer[0] - 'A');
    const auto category = get_or<std::string>(qj, path, "category", "local");
    if (category == "global") q.category = DeclaredType::Global;
    else if (category == "local") q.category = DeclaredType::Local;
    else throw SchemaError(path + ".category must be global or local");
    q.key_events = get_or<std::vector<std::string>>(qj, path, "key_events", {});
    if (qj.contains("p_correct") && !qj.at("p_correct").is_null()) q.p_correct = get<double>(qj, path, "p_correct");
    q.distractor_weights = get_or<std::vector<double>>(qj, path, "distractor_weights", {});
    w.questions.push_back(std::move(q));
  }
  w.finalize();
  return w;
}

json to_json(const World& w) {
  json videos = json::array();
  for (const auto& v : w.videos) {
    json events = json::array();
    for (const auto& e : v.events) events.push_back({{"token", e.token}, {"lo", e.lo}, {"hi", e.hi}});
    videos.push_back({{"video_id", v.meta.video_id}, {"n_frames", v.meta.n_frames}, {"fps", v.meta.fps},
                      {"events", std::move(events)}});
  }
  json questions = json::array();
  for (const auto& q : w.questions) {
    json qj = {{"id", q.id},
               {"video_id", q.video_id},
               {"question", q.question},
               {"options", q.options},
               {"answer", q.truth.str()},
               {"category", q.category == DeclaredType::Global ? "global" : "local"},
               {"key_events", q.key_events}};
    if (q.p_correct) qj["p_correct"] = *q.p_correct;
    if (!q.distractor_weights.empty()) qj["distractor_weights"] = q.distractor_weights;
    questions.push_back(std::move(qj));
  }
  const auto& p = w.policy;
  return {{"schema_version", kWorldSchemaVersion},
          {"seed", w.seed},
          {"policy",
           {{"p_correct_given_coverage", p.p_correct_given_coverage},
            {"p_correct_given_miss", p.p_correct_given_miss},
            {"margin_when_correct", dist_json(p.margin_when_correct)},
            {"margin_when_wrong", dist_json(p.margin_when_wrong)},
            {"base_logit", p.base_logit},
            {"probe",
             {{"yes_logit_hit", p.probe.yes_logit_hit},
              {"yes_logit_miss", p.probe.yes_logit_miss},
              {"noise_stddev", p.probe.noise_stddev}}}}},
          {"videos", std::move(videos)},
          {"questions", std::move(questions)}};
}

World load_world(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open world " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": invalid JSON: " + e.what());
  }
  return world_from_json(j);
}

void save_world(const std::filesystem::path& path, const World& w) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write world " + path.string());
  out << to_json(w).dump(1) << '\n';
  if (!out) throw IoError("error while writing " + path.string());
}

namespace {

const char* const kLocalVerbs[] = {"cooking", "cleaning", "reading", "running", "painting", "singing"};
const char* const kCounts[] = {"one", "two", "three", "four", "five", "six"};

std::int64_t uniform_int(Xoshiro256& rng, std::int64_t lo, std::int64_t hi_inclusive) {
  return lo + static_cast<std::int64_t>(rng.bounded(static_cast<std::uint64_t>(hi_inclusive - lo + 1)));
}

double uniform_real(Xoshiro256& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

}  // namespace

World generate_world(const GeneratorParams& gp) {
  if (gp.n_questions < 0 || gp.n_options < 2 || gp.n_options > 6 || gp.segments < 1 || gp.frames_per_sample < 1)
    throw InvalidArgument("invalid generator parameters");
  if (gp.min_global_events < 1 || gp.max_global_events < gp.min_global_events ||
      gp.max_global_events > gp.segments)
    throw InvalidArgument("global event counts must lie in [1, segments]");

  World w;
  w.seed = gp.seed;
  w.policy = gp.policy;
  Xoshiro256 rng(SeedHasher(gp.seed).add(std::string_view("world-generator")).digest());

  for (int i = 0; i < gp.n_questions; ++i) {
    char idbuf[32];
    std::snprintf(idbuf, sizeof idbuf, "%05d", i);
    const std::string suffix = idbuf;

    SimVideo video;
    video.meta.video_id = "vid" + suffix;
    video.meta.fps = gp.fps;
    video.meta.n_frames = std::max<std::int64_t>(
        gp.segments * gp.frames_per_sample,
        static_cast<std::int64_t>(std::llround(uniform_real(rng, gp.min_duration_s, gp.max_duration_s) * gp.fps)));
    const auto segments = split_segments(video.meta, gp.segments);
    const double bin = static_cast<double>(video.meta.n_frames) / gp.frames_per_sample;

    SimQuestion q;
    q.id = "q" + suffix;
    q.video_id = video.meta.video_id;
    const bool global = rng.uniform() < gp.fraction_global;
    q.category = global ? DeclaredType::Global : DeclaredType::Local;
    const int n_key = global ? static_cast<int>(uniform_int(rng, gp.min_global_events, gp.max_global_events)) : 1;

    std::vector<int> order(gp.segments);
    for (int t = 0; t < gp.segments; ++t) order[t] = t;
    for (int t = 0; t < n_key; ++t) std::swap(order[t], order[t + uniform_int(rng, 0, gp.segments - 1 - t)]);
    std::vector<int> chosen(order.begin(), order.begin() + n_key);
    std::sort(chosen.begin(), chosen.end());
    for (int e = 0; e < n_key; ++e) {
      const auto& seg = segments[chosen[e]];
      const auto len = std::clamp<std::int64_t>(
          std::llround(uniform_real(rng, gp.min_event_bins, gp.max_event_bins) * bin), 1, seg.size());
      const auto lo = uniform_int(rng, seg.lo, seg.hi - len);
      Event ev{"evt" + suffix + "_" + std::to_string(e), lo, lo + len};
      q.key_events.push_back(ev.token);
      video.events.push_back(std::move(ev));
    }
    for (int b = 0; b < gp.background_events; ++b) {
      const auto len = std::clamp<std::int64_t>(std::llround(uniform_real(rng, 0.05, 0.5) * bin), 1,
                                                video.meta.n_frames);
      const auto lo = uniform_int(rng, 0, video.meta.n_frames - len);
      video.events.push_back(Event{"bg" + suffix + "_" + std::to_string(b), lo, lo + len});
    }

    if (global) {
      q.question = "[" + q.id + "] How many times does the highlighted activity happen over the whole video?";
      for (int o = 0; o < gp.n_options; ++o) q.options.emplace_back(kCounts[o]);
    } else {
      q.question = "[" + q.id + "] What is the person doing at the key moment?";
      for (int o = 0; o < gp.n_options; ++o) q.options.emplace_back(kLocalVerbs[o]);
    }
    q.truth = OptionLabel(static_cast<int>(rng.bounded(static_cast<std::uint64_t>(gp.n_options))));
    if (rng.uniform() < gp.p_sticky_distractor) {
      q.distractor_weights.assign(gp.n_options - 1, 1.0);
      q.distractor_weights[rng.bounded(static_cast<std::uint64_t>(gp.n_options - 1))] = gp.sticky_weight;
    }
    if (gp.p_correct_range) q.p_correct = uniform_real(rng, gp.p_correct_range->first, gp.p_correct_range->second);

    w.videos.push_back(std::move(video));
    w.questions.push_back(std::move(q));
  }
  w.finalize();
  return w;
}

double bin_wise_coverage_probability(std::int64_t n_frames, std::int64_t k,
                                     const std::vector<std::pair<std::int64_t, std::int64_t>>& ranges) {
  if (n_frames < 1 || k < 1) throw InvalidArgument("coverage needs n_frames >= 1 and k >= 1");
  const std::size_t e = ranges.size();
  if (e > 16) throw InvalidArgument("coverage supports at most 16 ranges");
  const std::size_t full = (std::size_t{1} << e) - 1;

  auto mask_of = [&](std::int64_t frame) {
    std::size_t m = 0;
    for (std::size_t r = 0; r < e; ++r)
      if (frame >= ranges[r].first && frame < ranges[r].second) m |= std::size_t{1} << r;
    return m;
  };

  std::vector<double> dp(full + 1, 0.0);
  dp[0] = 1.0;
  for (std::int64_t b = 0; b < k; ++b) {
    const auto bin = bin_bounds(n_frames, k, b);
    // Distribution of the hit-mask of the single frame drawn from this bin.
    std::map<std::size_t, double> dist;
    if (bin.size() == 0) {
      dist[mask_of(std::clamp<std::int64_t>(bin.lo, 0, n_frames - 1))] = 1.0;
    } else {
      // The mask is constant between consecutive range endpoints.
      std::vector<std::int64_t> cuts{bin.lo, bin.hi};
      for (const auto& [lo, hi] : ranges) {
        if (lo > bin.lo && lo < bin.hi) cuts.push_back(lo);
        if (hi > bin.lo && hi < bin.hi) cuts.push_back(hi);
      }
      std::sort(cuts.begin(), cuts.end());
      cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
      for (std::size_t c = 0; c + 1 < cuts.size(); ++c)
        dist[mask_of(cuts[c])] += static_cast<double>(cuts[c + 1] - cuts[c]) / static_cast<double>(bin.size());
    }
    if (dist.size() == 1 && dist.begin()->first == 0) continue;
    std::vector<double> next(full + 1, 0.0);
    for (std::size_t m = 0; m <= full; ++m) {
      if (dp[m] == 0.0) continue;
      for (const auto& [hit, p] : dist) next[m | hit] += dp[m] * p;
    }
    dp.swap(next);
  }
  return dp[full];
}

double per_sample_accuracy(const World& w, const SimQuestion& q, std::int64_t k) {
  if (q.p_correct) return *q.p_correct;
  double covered = 0.0;
  if (!q.key_events.empty()) {
    const auto& v = w.video(q.video_id);
    std::vector<std::pair<std::int64_t, std::int64_t>> ranges;
    for (const auto& token : q.key_events) {
      const auto& ev = w.event(v, token);
      ranges.emplace_back(ev.lo, ev.hi);
    }
    covered = bin_wise_coverage_probability(v.meta.n_frames, k, ranges);
  }
  return covered * w.policy.p_correct_given_coverage + (1.0 - covered) * w.policy.p_correct_given_miss;
}

double closed_form_pass_at_n(double q, int n) {
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("q must lie in [0, 1]");
  if (n < 0) throw InvalidArgument("n must be non-negative");
  return 1.0 - std::pow(1.0 - q, n);
}

}  // namespace vsr::sim

namespace vsr::sim {

GeneratorParams reference_preset() {
  GeneratorParams p;
  p.min_event_bins = 0.1;
  p.max_event_bins = 2.5;
  p.policy.p_correct_given_coverage = 0.97;
  p.policy.p_correct_given_miss = 0.15;
  p.policy.margin_when_correct = {2.0, 1.2};
  p.policy.margin_when_wrong = {1.2, 0.9};
  p.policy.probe.noise_stddev = 2.0;
  return p;
}

GeneratorParams independent_preset(double lo, double hi) {
  GeneratorParams p = reference_preset();
  p.p_correct_range = std::make_pair(lo, hi);
  return p;
}

GeneratorParams localization_preset() {
  GeneratorParams p = reference_preset();
  // Long enough that the probe frames of a segment always land in the event.
  p.min_event_bins = 1.0;
  p.fraction_global = 0.0;
  p.policy.p_correct_given_coverage = 1.0;
  p.policy.probe.noise_stddev = 0.0;
  return p;
}

}  // namespace vsr::sim
