#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "vsr/config.hpp"
#include "vsr/errors.hpp"

using namespace vsr;
using nlohmann::json;

TEST_CASE("defaults") {
  const RunConfig c;
  CHECK(c.n_samples == 10);
  CHECK(c.frames_per_sample == 32);
  CHECK(c.scoring.alpha == 1.0);
  CHECK(c.scoring.beta == 3.0);
  CHECK(c.segments == 8);
  CHECK(c.strict);
}

TEST_CASE("config JSON round-trip") {
  RunConfig c;
  c.n_samples = 7;
  c.strategy = SamplingStrategy::FullyRandom;
  c.seed = 1ULL << 60;
  c.scoring.confidence = {IntraConfidence::MaxLogit, InterAggregate::Mean};
  c.scoring.restrict_to_sampled = true;
  c.probe_score = ProbeScore::YesMinusNo;
  c.backend.kind = BackendKind::Http;
  c.backend.video_endpoint = "http://localhost:1";
  c.backend.text_endpoint = "http://localhost:2";
  const auto j = to_json(c);
  CHECK(to_json(config_from_json(json::parse(j.dump()))) == j);
}

TEST_CASE("partial documents keep defaults") {
  const auto c = config_from_json(json{{"scoring", {{"beta", 5}}}, {"backend", {{"world", "w.json"}}}});
  CHECK(c.scoring.beta == 5.0);
  CHECK(c.scoring.alpha == 1.0);
  CHECK(c.n_samples == 10);
}

TEST_CASE("invalid configs") {
  const json world{{"backend", {{"world", "w.json"}}}};
  auto with = [&](json patch) {
    json d = world;
    d.merge_patch(patch);
    return d;
  };
  CHECK_THROWS_AS(config_from_json(with({{"run", {{"n_samples", 0}}}})), ConfigError);
  CHECK_THROWS_AS(config_from_json(with({{"run", {{"bogus", 1}}}})), ConfigError);
  CHECK_THROWS_AS(config_from_json(with({{"extra", json::object()}})), ConfigError);
  CHECK_THROWS_AS(config_from_json(with({{"scoring", {{"alpha", -1}}}})), ConfigError);
  CHECK_THROWS_AS(config_from_json(with({{"scoring", {{"alpha", "one"}}}})), ConfigError);
  CHECK_THROWS_AS(config_from_json(with({{"run", {{"strategy", "segment_uniform"}}}})), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::object()), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"backend", {{"kind", "http"}}}}), ConfigError);
}

TEST_CASE("overrides") {
  json doc = to_json(RunConfig{});
  apply_override(doc, "scoring.alpha=0.5");
  apply_override(doc, "run.strategy=uniform");
  apply_override(doc, "backend.world=w.json");
  const auto c = config_from_json(doc);
  CHECK(c.scoring.alpha == 0.5);
  CHECK(c.strategy == SamplingStrategy::Uniform);
  CHECK_THROWS_AS(apply_override(doc, "alpha=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(doc, "scoring.alpha"), ConfigError);
}

TEST_CASE("load_config resolves paths against the file") {
  const auto dir = std::filesystem::temp_directory_path() / "vsr_cfg_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "c.json") << R"({"backend":{"world":"world.json"},"voting":{"prompts_dir":"p"}})";
  const auto c = load_config(dir / "c.json");
  CHECK(std::filesystem::path(c.backend.world) == dir / "world.json");
  CHECK(std::filesystem::path(c.prompts_dir) == dir / "p");
  std::ofstream(dir / "bad.json") << "{";
  CHECK_THROWS_AS(load_config(dir / "bad.json"), ConfigError);
  CHECK_THROWS_AS(load_config(dir / "none.json"), IoError);
  std::filesystem::remove_all(dir);
}
