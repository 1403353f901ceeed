#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vsr/pipeline.hpp"

namespace vsr {

inline constexpr int kReportSchemaVersion = 1;

struct Aggregates {
  std::size_t n_questions = 0;
  std::size_t n_failed = 0;
  std::size_t n_scored = 0;  // accuracy denominator
  double accuracy = 0.0;
  double majority_accuracy = 0.0;
  std::map<int, double> pass_at;  // n -> Pass@n
  std::size_t n_divergent = 0;
  double divergence_pct = 0.0;
  std::optional<double> selection_accuracy_on_divergent;
  std::optional<double> random_baseline_on_divergent;

  friend bool operator==(const Aggregates&, const Aggregates&) = default;
};

/// Share of non-failed questions whose predictions disagree. Throws EmptySet
/// when no question has predictions.
double divergence_pct(const std::vector<QuestionRecord>& records);

struct DivergentAccuracy {
  double ours = 0.0;
  /// Expected accuracy of picking one prediction uniformly at random, i.e.
  /// the mean frequency score of the truth.
  double random_baseline = 0.0;
};

/// Throws NoDivergentQuestions when every question reached consensus.
DivergentAccuracy selection_accuracy_on_divergent(const std::vector<QuestionRecord>& records);

/// Pass@n over the records. Failed questions count as misses.
double pass_at_n(const std::vector<QuestionRecord>& records, int n);

/// Pass@n is reported for n in {1, 5, 10} up to n_samples, plus n_samples.
Aggregates compute_aggregates(const std::vector<QuestionRecord>& records, int n_samples, bool strict);

struct RunReport {
  nlohmann::json config;
  std::vector<QuestionRecord> records;
  Aggregates aggregates;
  /// Wall-clock data. The only part of report.json that varies between
  /// identical runs.
  nlohmann::json timestamps = nlohmann::json::object();
};

nlohmann::json to_json(const Aggregates& a);
nlohmann::json to_json(const RunReport& r);

/// Parses a report and recomputes its aggregates from the records; throws
/// SchemaError when they disagree.
RunReport report_from_json(const nlohmann::json& j);
RunReport load_report(const std::filesystem::path& path);

/// Writes report.json and summary.csv into `dir`, creating it if needed.
void write_report(const std::filesystem::path& dir, const RunReport& r);

/// "metric,value" rows, starting with schema_version.
std::string summary_csv(const Aggregates& a);

}  // namespace vsr
