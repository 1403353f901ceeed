#include "vsr/sweep.hpp"

#include <sstream>

#include "vsr/errors.hpp"

namespace vsr {

using nlohmann::json;

SweepAxis parse_sweep_axis(std::string_view s) {
  if (s == "alpha") return SweepAxis::Alpha;
  if (s == "beta") return SweepAxis::Beta;
  if (s == "frames") return SweepAxis::Frames;
  if (s == "n_samples") return SweepAxis::NSamples;
  if (s == "confidence_variant") return SweepAxis::ConfidenceVariant;
  throw InvalidArgument("unknown sweep axis '" + std::string(s) +
                        "' (expected alpha, beta, frames, n_samples or confidence_variant)");
}

std::string_view to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::Alpha: return "alpha";
    case SweepAxis::Beta: return "beta";
    case SweepAxis::Frames: return "frames";
    case SweepAxis::NSamples: return "n_samples";
    case SweepAxis::ConfidenceVariant: return "confidence_variant";
  }
  return "?";
}

json apply_axis(const json& config_doc, SweepAxis axis, const std::string& value) {
  json doc = config_doc;
  auto number = [&]() -> json {
    try {
      auto v = json::parse(value);
      if (!v.is_number()) throw InvalidArgument("");
      return v;
    } catch (const std::exception&) {
      throw InvalidArgument("sweep value '" + value + "' for axis " + std::string(to_string(axis)) +
                            " is not a number");
    }
  };
  switch (axis) {
    case SweepAxis::Alpha: doc["scoring"]["alpha"] = number(); break;
    case SweepAxis::Beta: doc["scoring"]["beta"] = number(); break;
    case SweepAxis::Frames: doc["run"]["frames_per_sample"] = number(); break;
    case SweepAxis::NSamples: doc["run"]["n_samples"] = number(); break;
    case SweepAxis::ConfidenceVariant: {
      const auto v = parse_confidence_variant(value);
      doc["scoring"]["confidence"] = {
          {"intra", v.intra == IntraConfidence::Marginal ? "marginal" : "maxlogit"},
          {"inter", v.inter == InterAggregate::Max ? "max" : "mean"}};
      break;
    }
  }
  return doc;
}

SweepResult sweep(const json& config_doc, SweepAxis axis, const std::vector<std::string>& values,
                  const std::vector<QAItem>& items, VideoModel& video, TextModel& text) {
  if (values.empty()) throw InvalidArgument("sweep needs at least one value");
  SweepResult out{axis, {}};
  for (const auto& value : values) {
    const auto cfg = config_from_json(apply_axis(config_doc, axis, value));
    auto run = run_dataset(items, cfg, video, text);
    RunReport report;
    report.config = to_json(cfg);
    report.aggregates = compute_aggregates(run.records, cfg.n_samples, cfg.strict);
    report.records = std::move(run.records);
    out.points.push_back(SweepPoint{value, std::move(report)});
  }
  return out;
}

std::string sweep_csv(const SweepResult& r) {
  std::ostringstream out;
  out << "axis,value,metric,metric_value\n";
  for (const auto& p : r.points) {
    std::istringstream rows(summary_csv(p.report.aggregates));
    std::string line;
    std::getline(rows, line);  // header
    while (std::getline(rows, line)) out << to_string(r.axis) << ',' << p.value << ',' << line << '\n';
  }
  return out.str();
}

}  // namespace vsr
