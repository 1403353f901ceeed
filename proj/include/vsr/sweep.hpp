#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vsr/report.hpp"

namespace vsr {

enum class SweepAxis { Alpha, Beta, Frames, NSamples, ConfidenceVariant };

/// Accepts alpha, beta, frames, n_samples, confidence_variant. Throws
/// InvalidArgument for anything else.
SweepAxis parse_sweep_axis(std::string_view s);
std::string_view to_string(SweepAxis a);

/// The config document with `value` written to the axis' key.
nlohmann::json apply_axis(const nlohmann::json& config_doc, SweepAxis axis, const std::string& value);

struct SweepPoint {
  std::string value;
  RunReport report;
};

struct SweepResult {
  SweepAxis axis;
  std::vector<SweepPoint> points;
};

/// One full run per value over the same dataset, backends and seed, so
/// samples are paired across values.
SweepResult sweep(const nlohmann::json& config_doc, SweepAxis axis, const std::vector<std::string>& values,
                  const std::vector<QAItem>& items, VideoModel& video, TextModel& text);

/// Long format: axis,value,metric,metric_value. One row per value per metric.
std::string sweep_csv(const SweepResult& r);

}  // namespace vsr
