#include "vsr/report.hpp"

#include <fstream>
#include <sstream>

#include "vsr/errors.hpp"

namespace vsr {

using nlohmann::json;

double divergence_pct(const std::vector<QuestionRecord>& records) {
  std::size_t ok = 0, divergent = 0;
  for (const auto& r : records) {
    if (r.failed) continue;
    ++ok;
    if (!r.consensus) ++divergent;
  }
  if (ok == 0) throw EmptySet("divergence_pct needs at least one question with predictions");
  return static_cast<double>(divergent) / static_cast<double>(ok);
}

DivergentAccuracy selection_accuracy_on_divergent(const std::vector<QuestionRecord>& records) {
  std::size_t n = 0, correct = 0;
  double expected = 0.0;
  for (const auto& r : records) {
    if (r.failed || r.consensus) continue;
    ++n;
    if (r.correct()) ++correct;
    const auto s_f = frequency_score(r.prediction_set());
    if (auto it = s_f.find(r.truth); it != s_f.end()) expected += it->second;
  }
  if (n == 0) throw NoDivergentQuestions();
  return DivergentAccuracy{static_cast<double>(correct) / static_cast<double>(n), expected / static_cast<double>(n)};
}

double pass_at_n(const std::vector<QuestionRecord>& records, int n) {
  std::vector<PredictionSet> sets;
  std::vector<OptionLabel> truths;
  sets.reserve(records.size());
  for (const auto& r : records) {
    sets.push_back(r.prediction_set());
    truths.push_back(r.truth);
  }
  return pass_at_n(sets, truths, n);
}

Aggregates compute_aggregates(const std::vector<QuestionRecord>& records, int n_samples, bool strict) {
  Aggregates a;
  a.n_questions = records.size();
  std::size_t correct = 0, majority_correct = 0;
  for (const auto& r : records) {
    if (r.failed) ++a.n_failed;
    if (r.correct()) ++correct;
    if (r.majority_correct()) ++majority_correct;
  }
  a.n_scored = strict ? a.n_questions : a.n_questions - a.n_failed;
  if (a.n_scored > 0) {
    a.accuracy = static_cast<double>(correct) / static_cast<double>(a.n_scored);
    a.majority_accuracy = static_cast<double>(majority_correct) / static_cast<double>(a.n_scored);
    std::vector<QuestionRecord> scored;
    const auto& pool = [&]() -> const std::vector<QuestionRecord>& {
      if (strict) return records;
      for (const auto& r : records)
        if (!r.failed) scored.push_back(r);
      return scored;
    }();
    for (int n : {1, 5, 10})
      if (n <= n_samples) a.pass_at[n] = pass_at_n(pool, n);
    a.pass_at[n_samples] = pass_at_n(pool, n_samples);
  }
  if (a.n_questions > a.n_failed) {
    a.divergence_pct = divergence_pct(records);
    for (const auto& r : records)
      if (!r.failed && !r.consensus) ++a.n_divergent;
    if (a.n_divergent > 0) {
      const auto d = selection_accuracy_on_divergent(records);
      a.selection_accuracy_on_divergent = d.ours;
      a.random_baseline_on_divergent = d.random_baseline;
    }
  }
  return a;
}

json to_json(const Aggregates& a) {
  json pass = json::object();
  for (const auto& [n, v] : a.pass_at) pass[std::to_string(n)] = v;
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"n_questions", a.n_questions},
          {"n_failed", a.n_failed},
          {"n_scored", a.n_scored},
          {"accuracy", a.accuracy},
          {"majority_accuracy", a.majority_accuracy},
          {"pass_at", std::move(pass)},
          {"n_divergent", a.n_divergent},
          {"divergence_pct", a.divergence_pct},
          {"selection_accuracy_on_divergent", opt(a.selection_accuracy_on_divergent)},
          {"random_baseline_on_divergent", opt(a.random_baseline_on_divergent)}};
}

json to_json(const RunReport& r) {
  json records = json::array();
  for (const auto& rec : r.records) records.push_back(to_json(rec));
  return {{"schema_version", kReportSchemaVersion},
          {"config", r.config},
          {"aggregates", to_json(r.aggregates)},
          {"records", std::move(records)},
          {"timestamps", r.timestamps}};
}

RunReport report_from_json(const json& j) {
  RunReport r;
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kReportSchemaVersion)
      throw SchemaError("report schema_version " + std::to_string(version) + " is not supported");
    r.config = j.at("config");
    for (const auto& rj : j.at("records")) r.records.push_back(question_record_from_json(rj));
    r.timestamps = j.value("timestamps", json::object());
    const int n_samples = r.config.at("run").at("n_samples").get<int>();
    const bool strict = r.config.at("run").at("strict").get<bool>();
    r.aggregates = compute_aggregates(r.records, n_samples, strict);
    if (to_json(r.aggregates) != j.at("aggregates"))
      throw SchemaError("report aggregates do not match its per-question records");
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed report: ") + e.what());
  }
  return r;
}

RunReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open report " + path.string());
  try {
    return report_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": invalid JSON: " + e.what());
  }
}

std::string summary_csv(const Aggregates& a) {
  std::ostringstream out;
  out.precision(17);
  out << "metric,value\n";
  out << "schema_version," << kReportSchemaVersion << '\n';
  out << "n_questions," << a.n_questions << '\n';
  out << "n_failed," << a.n_failed << '\n';
  out << "n_scored," << a.n_scored << '\n';
  out << "accuracy," << a.accuracy << '\n';
  out << "majority_accuracy," << a.majority_accuracy << '\n';
  for (const auto& [n, v] : a.pass_at) out << "pass_at_" << n << ',' << v << '\n';
  out << "n_divergent," << a.n_divergent << '\n';
  out << "divergence_pct," << a.divergence_pct << '\n';
  out << "selection_accuracy_on_divergent,";
  if (a.selection_accuracy_on_divergent) out << *a.selection_accuracy_on_divergent;
  out << '\n';
  out << "random_baseline_on_divergent,";
  if (a.random_baseline_on_divergent) out << *a.random_baseline_on_divergent;
  out << '\n';
  return out.str();
}

void write_report(const std::filesystem::path& dir, const RunReport& r) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  {
    std::ofstream out(dir / "report.json", std::ios::binary);
    if (!out) throw IoError("cannot write " + (dir / "report.json").string());
    out << to_json(r).dump(1) << '\n';
    if (!out) throw IoError("error while writing report.json");
  }
  std::ofstream csv(dir / "summary.csv", std::ios::binary);
  if (!csv) throw IoError("cannot write " + (dir / "summary.csv").string());
  csv << summary_csv(r.aggregates);
}

}  // namespace vsr
