#include "vsr/config.hpp"

#include <cmath>
#include <fstream>

#include "vsr/errors.hpp"

namespace vsr {

using nlohmann::json;

void RunConfig::validate() const {
  if (n_samples < 1) throw ConfigError("run.n_samples must be >= 1");
  if (frames_per_sample < 1) throw ConfigError("run.frames_per_sample must be >= 1");
  if (strategy == SamplingStrategy::SegmentUniform)
    throw ConfigError("run.strategy must be binwise, fully_random or uniform");
  if (workers < 1) throw ConfigError("run.workers must be >= 1");
  if (!(scoring.alpha >= 0.0) || !std::isfinite(scoring.alpha)) throw ConfigError("scoring.alpha must be >= 0");
  if (!(scoring.beta >= 0.0) || !std::isfinite(scoring.beta)) throw ConfigError("scoring.beta must be >= 0");
  if (segments < 1) throw ConfigError("voting.segments must be >= 1");
  if (frames_per_segment < 1) throw ConfigError("voting.frames_per_segment must be >= 1");
  if (backend.kind == BackendKind::Sim && backend.world.empty())
    throw ConfigError("backend.world is required for the sim backend");
  if (backend.kind == BackendKind::Http && (backend.video_endpoint.empty() || backend.text_endpoint.empty()))
    throw ConfigError("backend.video_endpoint and backend.text_endpoint are required for the http backend");
  if (backend.http.timeout_ms <= 0) throw ConfigError("backend.timeout_ms must be positive");
  if (backend.http.retries < 0) throw ConfigError("backend.retries must be >= 0");
  if (backend.http.backoff_ms < 0) throw ConfigError("backend.backoff_ms must be >= 0");
}

VotingSettings RunConfig::voting_settings() const {
  VotingSettings v;
  v.segments = segments;
  v.frames_per_segment = frames_per_segment;
  v.probe_score = probe_score;
  v.prompts = prompts_dir.empty() ? PromptSet::builtin() : PromptSet::load(prompts_dir);
  return v;
}

json to_json(const RunConfig& c) {
  return {
      {"run",
       {{"n_samples", c.n_samples},
        {"frames_per_sample", c.frames_per_sample},
        {"strategy", std::string(to_string(c.strategy))},
        {"seed", c.seed},
        {"workers", c.workers},
        {"strict", c.strict}}},
      {"scoring",
       {{"alpha", c.scoring.alpha},
        {"beta", c.scoring.beta},
        {"confidence",
         {{"intra", c.scoring.confidence.intra == IntraConfidence::Marginal ? "marginal" : "maxlogit"},
          {"inter", c.scoring.confidence.inter == InterAggregate::Max ? "max" : "mean"}}}}},
      {"voting",
       {{"segments", c.segments},
        {"frames_per_segment", c.frames_per_segment},
        {"restrict_to_sampled", c.scoring.restrict_to_sampled},
        {"probe_score", c.probe_score == ProbeScore::YesLogit ? "yes" : "yes_minus_no"},
        {"prompts_dir", c.prompts_dir}}},
      {"backend",
       {{"kind", c.backend.kind == BackendKind::Sim ? "sim" : "http"},
        {"world", c.backend.world},
        {"video_endpoint", c.backend.video_endpoint},
        {"text_endpoint", c.backend.text_endpoint},
        {"timeout_ms", c.backend.http.timeout_ms},
        {"retries", c.backend.http.retries},
        {"backoff_ms", c.backend.http.backoff_ms}}},
  };
}

RunConfig config_from_json(const json& input) {
  if (!input.is_object()) throw ConfigError("config must be a JSON object");
  json doc = to_json(RunConfig{});
  for (const auto& [section, body] : input.items()) {
    if (!doc.contains(section)) throw ConfigError("unknown config section '" + section + "'");
    if (!body.is_object()) throw ConfigError("config section '" + section + "' must be an object");
    for (const auto& [key, value] : body.items()) {
      if (!doc[section].contains(key)) throw ConfigError("unknown config key '" + section + "." + key + "'");
      doc[section][key] = value;
    }
  }

  RunConfig c;
  std::string where;
  try {
    const auto& run = doc["run"];
    where = "run";
    c.n_samples = run["n_samples"].get<int>();
    c.frames_per_sample = run["frames_per_sample"].get<int>();
    c.strategy = parse_strategy(run["strategy"].get<std::string>());
    c.seed = run["seed"].get<std::uint64_t>();
    c.workers = run["workers"].get<int>();
    c.strict = run["strict"].get<bool>();

    const auto& scoring = doc["scoring"];
    where = "scoring";
    c.scoring.alpha = scoring["alpha"].get<double>();
    c.scoring.beta = scoring["beta"].get<double>();
    const auto& conf = scoring["confidence"];
    if (conf.is_string()) {
      c.scoring.confidence = parse_confidence_variant(conf.get<std::string>());
    } else {
      c.scoring.confidence = parse_confidence_variant(conf.value("intra", std::string("marginal")) + ":" +
                                                      conf.value("inter", std::string("max")));
    }

    const auto& voting = doc["voting"];
    where = "voting";
    c.segments = voting["segments"].get<int>();
    c.frames_per_segment = voting["frames_per_segment"].get<int>();
    c.scoring.restrict_to_sampled = voting["restrict_to_sampled"].get<bool>();
    const auto probe = voting["probe_score"].get<std::string>();
    if (probe == "yes") c.probe_score = ProbeScore::YesLogit;
    else if (probe == "yes_minus_no") c.probe_score = ProbeScore::YesMinusNo;
    else throw ConfigError("voting.probe_score must be 'yes' or 'yes_minus_no'");
    c.prompts_dir = voting["prompts_dir"].get<std::string>();

    const auto& backend = doc["backend"];
    where = "backend";
    const auto kind = backend["kind"].get<std::string>();
    if (kind == "sim") c.backend.kind = BackendKind::Sim;
    else if (kind == "http") c.backend.kind = BackendKind::Http;
    else throw ConfigError("backend.kind must be 'sim' or 'http'");
    c.backend.world = backend["world"].get<std::string>();
    c.backend.video_endpoint = backend["video_endpoint"].get<std::string>();
    c.backend.text_endpoint = backend["text_endpoint"].get<std::string>();
    c.backend.http.timeout_ms = backend["timeout_ms"].get<int>();
    c.backend.http.retries = backend["retries"].get<int>();
    c.backend.http.backoff_ms = backend["backoff_ms"].get<int>();
  } catch (const json::exception& e) {
    throw ConfigError("config section '" + where + "': " + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  const auto base = path.parent_path();
  auto resolve = [&](const char* section, const char* key) {
    if (!j.contains(section) || !j[section].is_object() || !j[section].contains(key)) return;
    auto& v = j[section][key];
    if (!v.is_string() || v.get<std::string>().empty()) return;
    std::filesystem::path p = v.get<std::string>();
    if (p.is_relative()) v = (base / p).lexically_normal().string();
  };
  resolve("backend", "world");
  resolve("voting", "prompts_dir");
  return config_from_json(j);
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string_view::npos || dot == std::string_view::npos || dot > eq)
    throw ConfigError("override must look like section.key=value, got '" + std::string(assignment) + "'");
  const std::string section(assignment.substr(0, dot));
  const std::string key(assignment.substr(dot + 1, eq - dot - 1));
  const std::string raw(assignment.substr(eq + 1));
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  if (!doc.is_object()) doc = json::object();
  doc[section][key] = std::move(value);
}

}  // namespace vsr
