#include <doctest.h>

#include <json.hpp>

#include "vsr/clients.hpp"
#include "vsr/errors.hpp"
#include "vsr/protocol.hpp"
#include "vsr/rng.hpp"
#include "vsr/sim_backend.hpp"
#include "world_fixtures.hpp"

using namespace vsr;
using nlohmann::json;

namespace {

VideoQAResponse with_logits(std::map<char, double> logits) {
  VideoQAResponse r;
  for (auto [c, v] : logits) r.option_logits[OptionLabel(c - 'A')] = v;
  return r;
}

VideoQARequest answer_request(const std::string& video = "v1", const std::string& question = "qa") {
  VideoQARequest req;
  req.video_id = video;
  req.question_id = question;
  req.frame_indices = {0, 100, 200};
  req.question_text = "What is the person doing at the key moment?";
  req.options = {"cooking", "cleaning", "reading", "running"};
  return req;
}

}  // namespace

TEST_CASE("parse_option examples") {
  CHECK(parse_option("The answer is (B).", 4) == OptionLabel(1));
  CHECK(parse_option("C", 4) == OptionLabel(2));
  CHECK_FALSE(parse_option("I cannot determine this.", 4).has_value());
}

TEST_CASE("parse_option edge cases") {
  CHECK(parse_option("B. cleaning", 4) == OptionLabel(1));
  CHECK(parse_option("Answer: D)", 4) == OptionLabel(3));
  // Letters inside words do not count, nor do letters past the option range.
  CHECK_FALSE(parse_option("Cats", 4).has_value());
  CHECK(parse_option("E then A", 4) == OptionLabel(0));
  CHECK_FALSE(parse_option("", 4).has_value());
  CHECK_FALSE(parse_option("(a)", 4).has_value());
}

TEST_CASE("extract_margin examples") {
  auto m = extract_margin(with_logits({{'A', 5.0}, {'B', 3.0}, {'C', 1.0}}));
  CHECK(m.best == OptionLabel(0));
  CHECK(m.margin == 2.0);
  CHECK(m.max_logit == 5.0);

  m = extract_margin(with_logits({{'A', 2.0}, {'B', 2.0}}));
  CHECK(m.best == OptionLabel(0));
  CHECK(m.margin == 0.0);

  m = extract_margin(with_logits({{'A', 1.0}, {'B', 4.0}, {'C', 3.5}, {'D', 0.0}}));
  CHECK(m.best == OptionLabel(1));
  CHECK(m.margin == 0.5);

  CHECK_THROWS_AS(extract_margin(with_logits({{'A', 1.0}})), MissingLogits);
  CHECK_THROWS_AS(extract_margin(VideoQAResponse{}), MissingLogits);
}

TEST_CASE("resolve_answer prefers the verbalized letter") {
  auto r = with_logits({{'A', 1.0}, {'B', 4.0}});
  r.raw_text = "(A)";
  CHECK(resolve_answer(r, 2) == OptionLabel(0));
  r.raw_text = "unsure";
  CHECK(resolve_answer(r, 2) == OptionLabel(1));
  CHECK_FALSE(resolve_answer(VideoQAResponse{"unsure", {}, {}, {}}, 2).has_value());
}

TEST_CASE("option labels") {
  CHECK(OptionLabel::from_letter("C") == OptionLabel(2));
  CHECK(OptionLabel(3).str() == "D");
  CHECK_THROWS_AS(OptionLabel::from_letter("c"), InvalidArgument);
  CHECK_THROWS_AS(OptionLabel::from_letter("AB"), InvalidArgument);
  CHECK(format_options({"x", "y"}) == "(A) x\n(B) y");
}

TEST_CASE("request and response JSON round-trip for random messages") {
  Xoshiro256 rng(5);
  for (int i = 0; i < 300; ++i) {
    VideoQARequest req = answer_request("vid" + std::to_string(rng.bounded(100)), "q" + std::to_string(i));
    req.task = static_cast<VideoTask>(rng.bounded(3));
    req.frame_indices.clear();
    for (std::uint64_t j = 0, n = rng.bounded(40); j < n; ++j)
      req.frame_indices.push_back(static_cast<std::int64_t>(rng.bounded(1u << 20)));
    req.want_logits = rng.bounded(2) == 1;
    req.decode.temperature = rng.uniform();
    CHECK(video_request_from_json(json::parse(to_json(req).dump())) == req);

    VideoQAResponse resp;
    resp.raw_text = "The answer is (" + OptionLabel(static_cast<int>(rng.bounded(4))).str() + ")";
    for (int o = 0; o < 4; ++o)
      if (rng.bounded(2)) resp.option_logits[OptionLabel(o)] = rng.normal(0, 10);
    if (rng.bounded(2)) resp.yes_logit = rng.normal();
    CHECK(video_response_from_json(json::parse(to_json(resp).dump())) == resp);
  }
  TextLMRequest t{"### task: x\nhello", {0.5, 0.9}};
  CHECK(text_request_from_json(to_json(t)) == t);
  CHECK(text_response_from_json(to_json(TextLMResponse{"ok"})).text == "ok");
}

TEST_CASE("malformed JSON is a ProtocolError") {
  CHECK_THROWS_AS(video_request_from_json(json{{"video_id", 3}}), ProtocolError);
  CHECK_THROWS_AS(video_response_from_json(json{{"option_logits", {{"A", "high"}}}}), ProtocolError);
  CHECK_THROWS_AS(video_response_from_json(json{{"raw_text", "x"}, {"option_logits", {{"a", 1.0}}}}),
                  ProtocolError);
  CHECK_THROWS_AS(text_response_from_json(json::array()), ProtocolError);
}

TEST_CASE("answer requests must carry options") {
  auto req = answer_request();
  req.options.clear();
  CHECK_THROWS_AS(req.validate(), InvalidArgument);
  req.task = VideoTask::Narrate;
  CHECK_NOTHROW(req.validate());
}

TEST_CASE("HTTP backend against the sim server") {
  auto world = fixtures::shared(fixtures::small_world());
  sim::SimServer server(world);
  const int port = server.start("127.0.0.1", 0);
  HttpBackend http("http://127.0.0.1:" + std::to_string(port), HttpSettings{5000, 0, 1});

  SUBCASE("well-formed request returns one logit per option") {
    const auto resp = http.video_qa(answer_request());
    CHECK(resp.option_logits.size() == 4);
    CHECK(resp == sim::sim_video_qa(answer_request(), *world));
  }
  SUBCASE("want_logits=false may omit logits") {
    auto req = answer_request();
    req.want_logits = false;
    const auto resp = http.video_qa(req);
    CHECK(resp.option_logits.empty());
    CHECK(parse_option(resp.raw_text, 4).has_value());
  }
  SUBCASE("backend errors keep their kind") {
    try {
      http.video_qa(answer_request("nope"));
      FAIL("expected BackendError");
    } catch (const BackendError& e) {
      CHECK(e.backend_kind() == "UnknownVideo");
    }
    CHECK_THROWS_AS(http.complete(TextLMRequest{"garbage", {}}), BackendError);
  }
  SUBCASE("text model") {
    TextLMRequest req{"### task: categorize (v1)\nQuestion: " + world->question("qb").question + "\n", {}};
    CHECK(http.complete(req).text.rfind("GLOBAL", 0) == 0);
  }
  server.stop();
  CHECK(server.video_requests() + server.text_requests() > 0);
}

TEST_CASE("unreachable endpoint is a TransportError after the configured retries") {
  // Port 1 is privileged and nothing listens on it in the test environment.
  HttpBackend http("http://127.0.0.1:1", HttpSettings{500, 2, 1});
  try {
    http.video_qa(answer_request());
    FAIL("expected TransportError");
  } catch (const TransportError& e) {
    CHECK(e.attempts() == 3);
  }
  CHECK_THROWS_AS(http.complete(TextLMRequest{"x", {}}), TransportError);
}

TEST_CASE("counting wrappers count failed calls too") {
  auto world = fixtures::shared(fixtures::small_world());
  sim::SimBackend sim(world);
  CountingVideoModel video(sim);
  CountingTextModel text(sim);
  video.video_qa(answer_request());
  CHECK_THROWS(video.video_qa(answer_request("nope")));
  CHECK_THROWS(text.complete(TextLMRequest{"garbage", {}}));
  CHECK(video.calls() == 2);
  CHECK(text.calls() == 1);
}
