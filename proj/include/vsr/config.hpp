#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "vsr/clients.hpp"
#include "vsr/sampling.hpp"
#include "vsr/scoring.hpp"
#include "vsr/voting.hpp"

namespace vsr {

enum class BackendKind { Sim, Http };

struct BackendConfig {
  BackendKind kind = BackendKind::Sim;
  std::string world;           // sim: path to the world JSON
  std::string video_endpoint;  // http: base URL of the video model
  std::string text_endpoint;   // http: base URL of the text model
  HttpSettings http;
};

/// Everything a run needs. Defaults: 10 samples of 32 bin-wise frames,
/// 8 voting segments, alpha 1, beta 3, marginal/max confidence.
struct RunConfig {
  int n_samples = 10;
  int frames_per_sample = 32;
  SamplingStrategy strategy = SamplingStrategy::BinWise;
  std::uint64_t seed = 0;
  int workers = 1;
  /// Failed questions count as wrong when strict; otherwise they leave the
  /// accuracy denominators.
  bool strict = true;

  ScoringParams scoring;

  int segments = 8;
  int frames_per_segment = 32;
  ProbeScore probe_score = ProbeScore::YesLogit;
  std::string prompts_dir;  // empty: built-in templates

  BackendConfig backend;

  /// Throws ConfigError on any out-of-range value.
  void validate() const;
  VotingSettings voting_settings() const;
};

/// Parses the nested config layout (run / scoring / voting / backend).
/// Missing keys keep their defaults; unknown keys are a ConfigError.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& c);

/// Reads a config file. Relative world and prompt paths are resolved
/// against the file's directory.
RunConfig load_config(const std::filesystem::path& path);

/// Applies "section.key=value" to a config document. The value is parsed as
/// JSON when possible and kept as a string otherwise.
void apply_override(nlohmann::json& doc, std::string_view assignment);

}  // namespace vsr
