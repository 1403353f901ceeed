#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <set>
#include <fstream>

#include "vsr/dataset.hpp"
#include "vsr/errors.hpp"
#include "vsr/prompts.hpp"
#include "vsr/rng.hpp"
#include "vsr/sampling.hpp"
#include "vsr/sim_backend.hpp"
#include "world_fixtures.hpp"

using namespace vsr;
using namespace vsr::sim;
using fs_path = std::filesystem::path;

namespace {

using Ranges = std::vector<std::pair<std::int64_t, std::int64_t>>;

// Enumerates every bin-wise schedule and counts the ones hitting all ranges.
double brute_force_coverage(std::int64_t n, std::int64_t k, const Ranges& ranges) {
  std::vector<std::pair<std::int64_t, std::int64_t>> bins;
  for (std::int64_t b = 0; b < k; ++b) bins.emplace_back(b * n / k, (b + 1) * n / k);
  std::vector<std::int64_t> pick(k);
  double total = 0, hits = 0;
  std::function<void(std::int64_t, double)> rec = [&](std::int64_t b, double weight) {
    if (b == k) {
      total += weight;
      bool all = true;
      for (auto [lo, hi] : ranges) {
        bool any = false;
        for (auto f : pick) any = any || (f >= lo && f < hi);
        all = all && any;
      }
      if (all) hits += weight;
      return;
    }
    auto [lo, hi] = bins[b];
    if (hi == lo) {
      pick[b] = std::min(lo, n - 1);
      rec(b + 1, weight);
      return;
    }
    for (std::int64_t f = lo; f < hi; ++f) {
      pick[b] = f;
      rec(b + 1, weight / static_cast<double>(hi - lo));
    }
  };
  rec(0, 1.0);
  return hits / total;
}

VideoQARequest answer(const World& w, const std::string& qid, std::vector<std::int64_t> frames) {
  const auto& q = w.question(qid);
  VideoQARequest req;
  req.video_id = q.video_id;
  req.question_id = qid;
  req.frame_indices = std::move(frames);
  req.question_text = q.question;
  req.options = q.options;
  return req;
}

TextLMRequest prompt_for(const World& w, const std::string& qid, const std::string& tmpl,
                         std::map<std::string, std::string> vars = {}) {
  vars["question"] = w.question(qid).question;
  return TextLMRequest{render_prompt(tmpl, vars), {}};
}

}  // namespace

TEST_CASE("forced branch: covered frames with p_correct_given_coverage = 1") {
  SimPolicy p;
  p.p_correct_given_coverage = 1.0;
  p.margin_when_correct = {2.5, 0.0};
  const auto w = fixtures::small_world(5, p);
  for (std::int64_t off = 0; off < 30; ++off) {
    const auto resp = sim_video_qa(answer(w, "qa", {0, 540 + off, 799}), w);
    const auto m = extract_margin(resp);
    CHECK(m.best == w.question("qa").truth);
    CHECK(m.margin == doctest::Approx(2.5));
    CHECK(parse_option(resp.raw_text, 4) == m.best);
  }
}

TEST_CASE("forced branch: missed frames with p_correct_given_miss = 0") {
  SimPolicy p;
  p.p_correct_given_miss = 0.0;
  const auto w = fixtures::small_world(5, p);
  for (std::int64_t f = 0; f < 500; f += 7) {
    const auto resp = sim_video_qa(answer(w, "qa", {f}), w);
    CHECK(extract_margin(resp).best != w.question("qa").truth);
  }
}

TEST_CASE("identical requests give byte-identical responses") {
  const auto w = fixtures::small_world();
  const auto req = answer(w, "qa", {1, 2, 3, 560});
  CHECK(to_json(sim_video_qa(req, w)).dump() == to_json(sim_video_qa(req, w)).dump());
  auto other = req;
  other.frame_indices = {1, 2, 3, 561};
  // Different frames draw different randomness.
  CHECK(sim_video_qa(other, w).option_logits != sim_video_qa(req, w).option_logits);
}

TEST_CASE("sim errors") {
  const auto w = fixtures::small_world();
  auto req = answer(w, "qa", {1});
  req.video_id = "missing";
  CHECK_THROWS_AS(sim_video_qa(req, w), UnknownVideo);
  req = answer(w, "qa", {1});
  req.question_id = "missing";
  CHECK_THROWS_AS(sim_video_qa(req, w), UnknownQuestion);
  req = answer(w, "qa", {800});
  CHECK_THROWS_AS(sim_video_qa(req, w), ProtocolError);
  CHECK_THROWS_AS(sim_text_lm(TextLMRequest{"hello there", {}}, w), UnrecognizedPrompt);
  CHECK_THROWS_AS(sim_text_lm(TextLMRequest{"### task: categorize\nQuestion: unknown?\n", {}}, w),
                  UnrecognizedPrompt);
}

TEST_CASE("sim text model follows the world annotations") {
  const auto w = fixtures::small_world();
  const auto prompts = PromptSet::builtin();
  CHECK(sim_text_lm(prompt_for(w, "qb", prompts.categorize), w).text.rfind("GLOBAL", 0) == 0);
  CHECK(sim_text_lm(prompt_for(w, "qa", prompts.categorize), w).text.rfind("LOCAL", 0) == 0);

  const auto both = prompt_for(w, "qb", prompts.summarize, {{"clues", "Segment 2: evt_g1\nSegment 7: evt_g2"}});
  CHECK(parse_option(sim_text_lm(both, w).text, 4) == w.question("qb").truth);
  const auto one = prompt_for(w, "qb", prompts.summarize, {{"clues", "Segment 2: evt_g1"}});
  CHECK_FALSE(parse_option(sim_text_lm(one, w).text, 4).has_value());

  const auto rewrite = sim_text_lm(prompt_for(w, "qa", prompts.localize), w).text;
  CHECK(rewrite.find("evt_local") != std::string::npos);
  CHECK(rewrite.back() == '?');
}

TEST_CASE("probes and narrations report event presence") {
  const auto w = fixtures::small_world(5);
  auto req = answer(w, "qa", {550});
  req.task = VideoTask::Probe;
  req.options = {"Yes", "No"};
  CHECK(*sim_video_qa(req, w).yes_logit == w.policy.probe.yes_logit_hit);
  req.frame_indices = {100};
  CHECK(*sim_video_qa(req, w).yes_logit == w.policy.probe.yes_logit_miss);

  req.task = VideoTask::Narrate;
  req.options.clear();
  req.frame_indices = {130, 305, 650};
  const auto text = sim_video_qa(req, w).raw_text;
  CHECK(text.find("evt_g1") != std::string::npos);
  CHECK(text.find("bg_noise") != std::string::npos);
  CHECK(text.find("evt_g2") != std::string::npos);
  CHECK(text.find("evt_local") == std::string::npos);
  req.frame_indices = {0};
  CHECK(sim_video_qa(req, w).raw_text == "NONE");
}

TEST_CASE("closed-form pass@n") {
  CHECK(closed_form_pass_at_n(0.3, 10) == doctest::Approx(0.9717524751).epsilon(1e-9));
  CHECK(closed_form_pass_at_n(0.0, 7) == 0.0);
  CHECK(closed_form_pass_at_n(1.0, 1) == 1.0);
  CHECK_THROWS_AS(closed_form_pass_at_n(1.5, 1), InvalidArgument);

  // Monte Carlo cross-check over 10^5 trials, 3 sigma.
  Xoshiro256 rng(17);
  const int trials = 100000;
  int hits = 0;
  for (int t = 0; t < trials; ++t) {
    bool any = false;
    for (int i = 0; i < 10; ++i) any = any || rng.uniform() < 0.3;
    hits += any;
  }
  const double p = closed_form_pass_at_n(0.3, 10);
  CHECK(std::abs(hits / double(trials) - p) < 3 * std::sqrt(p * (1 - p) / trials));
}

TEST_CASE("coverage probability matches brute-force enumeration") {
  const std::vector<std::tuple<std::int64_t, std::int64_t, Ranges>> cases{
      {20, 4, {{3, 6}}},
      {23, 5, {{0, 2}, {10, 19}}},
      {17, 6, {{4, 5}, {5, 7}, {12, 16}}},
      {12, 4, {{0, 12}}},
      {9, 3, {{2, 3}, {2, 3}}},
      {5, 8, {{1, 2}}},
  };
  for (const auto& [n, k, ranges] : cases) {
    CAPTURE(n);
    CAPTURE(k);
    CHECK(bin_wise_coverage_probability(n, k, ranges) ==
          doctest::Approx(brute_force_coverage(n, k, ranges)).epsilon(1e-12));
  }
}

TEST_CASE("coverage probability matches sampled schedules") {
  const Ranges ranges{{1000, 1400}, {5200, 5260}};
  const std::int64_t n = 9000, k = 32;
  const double exact = bin_wise_coverage_probability(n, k, ranges);
  const int trials = 40000;
  int hits = 0;
  for (int s = 0; s < trials; ++s) {
    const auto idx = bin_wise_sample(VideoMeta{"v", n, 30}, k, static_cast<std::uint64_t>(s)).indices;
    bool all = true;
    for (auto [lo, hi] : ranges)
      all = all && std::any_of(idx.begin(), idx.end(), [&](auto f) { return f >= lo && f < hi; });
    hits += all;
  }
  CHECK(std::abs(hits / double(trials) - exact) < 3 * std::sqrt(exact * (1 - exact) / trials) + 1e-9);
}

TEST_CASE("world JSON round-trip and schema errors") {
  const auto w = generate_world([] {
    auto p = reference_preset();
    p.n_questions = 25;
    return p;
  }());
  const auto back = world_from_json(to_json(w));
  CHECK(to_json(back).dump() == to_json(w).dump());

  auto bad = to_json(w);
  bad["questions"][0]["answer"] = "Z";
  CHECK_THROWS_AS(world_from_json(bad), SchemaError);
  bad = to_json(w);
  bad["videos"][0]["events"][0]["hi"] = 1LL << 40;
  CHECK_THROWS_AS(world_from_json(bad), SchemaError);
  bad = to_json(w);
  bad["policy"]["p_correct_given_coverage"] = 1.5;
  CHECK_THROWS_AS(world_from_json(bad), SchemaError);
  bad = to_json(w);
  bad["questions"][0]["key_events"] = {"no_such_event"};
  CHECK_THROWS_AS(world_from_json(bad), SchemaError);
  bad = to_json(w);
  bad["schema_version"] = 99;
  CHECK_THROWS_AS(world_from_json(bad), SchemaError);

  const auto path = std::filesystem::temp_directory_path() / "vsr_test_world.json";
  save_world(path, w);
  CHECK(to_json(load_world(path)).dump() == to_json(w).dump());
  std::ofstream(path) << "{not json";
  CHECK_THROWS_AS(load_world(path), SchemaError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_world(path), IoError);
}

TEST_CASE("generator invariants") {
  auto p = reference_preset();
  p.n_questions = 300;
  const auto w = generate_world(p);
  CHECK(to_json(generate_world(p)).dump() == to_json(w).dump());
  CHECK(w.questions.size() == 300);
  for (const auto& q : w.questions) {
    const auto& v = w.video(q.video_id);
    const auto segments = split_segments(v.meta, p.segments);
    std::set<int> used;
    for (const auto& token : q.key_events) {
      const auto& e = w.event(v, token);
      CHECK(e.lo >= 0);
      CHECK(e.hi <= v.meta.n_frames);
      CHECK(e.lo < e.hi);
      int seg = -1;
      for (const auto& s : segments)
        if (e.lo >= s.lo && e.hi <= s.hi) seg = s.index;
      CHECK(seg >= 0);
      used.insert(seg);
    }
    CHECK(used.size() == q.key_events.size());
    if (q.category == DeclaredType::Local) CHECK(q.key_events.size() == 1);
  }
}

TEST_CASE("the shipped reference world is the reference preset") {
  const auto shipped = load_world(fs_path(VSR_DATA_DIR) / "reference" / "world.json");
  CHECK(to_json(shipped) == to_json(generate_world(reference_preset())));
  const auto dataset = load_dataset(fs_path(VSR_DATA_DIR) / "reference" / "dataset.jsonl");
  REQUIRE(dataset.items.size() == shipped.questions.size());
  const auto expect = shipped.dataset();
  for (std::size_t i = 0; i < expect.size(); ++i) CHECK(to_json(dataset.items[i]) == to_json(expect[i]));
}
