#include "commands.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "vsr/config.hpp"
#include "vsr/dataset.hpp"
#include "vsr/errors.hpp"
#include "vsr/log.hpp"
#include "vsr/pipeline.hpp"
#include "vsr/report.hpp"
#include "vsr/sim_backend.hpp"
#include "vsr/sim_world.hpp"
#include "vsr/sweep.hpp"

namespace vsr::cli {

using nlohmann::json;

namespace {

int exit_code_for(const Error& e) {
  const auto& k = e.kind();
  if (k == "ConfigError") return kConfig;
  if (k == "SchemaError") return kSchema;
  if (k == "TransportError") return kTransport;
  if (k == "IoError") return kIo;
  if (k == "InvalidArgument") return kUsage;
  return kInternal;
}

int report_error(std::ostream& err, const std::string& kind, const std::string& message, int code) {
  err << json{{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}}.dump() << '\n';
  return code;
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return report_error(err, e.kind(), e.what(), exit_code_for(e));
  } catch (const std::exception& e) {
    return report_error(err, "InternalError", e.what(), kInternal);
  }
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

// The config document after file resolution and command-line overrides.
json config_document(const CommonArgs& args) {
  json doc = to_json(load_config(args.config));
  for (const auto& o : args.overrides) apply_override(doc, o);
  if (args.workers) doc["run"]["workers"] = *args.workers;
  if (args.seed) doc["run"]["seed"] = *args.seed;
  config_from_json(doc);  // validates
  return doc;
}

std::vector<QAItem> load_items(const std::filesystem::path& path) {
  auto load = load_dataset(path);
  return std::move(load.items);
}

// For the sim backend every dataset question must exist in the world.
void check_against_world(const std::vector<QAItem>& items, const Backends& b) {
  if (!b.world) return;
  for (const auto& item : items) {
    try {
      const auto& q = b.world->question(item.id);
      const auto& v = b.world->video(item.video.video_id);
      if (q.video_id == item.video.video_id && v.meta.n_frames == item.video.n_frames) continue;
    } catch (const UnknownQuestion&) {
    } catch (const UnknownVideo&) {
    }
    throw SchemaError("dataset item " + item.id + " does not match the world");
  }
}

}  // namespace

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto doc = config_document(args);
    const auto cfg = config_from_json(doc);
    cfg.voting_settings();  // fails early on unreadable prompt templates
    const auto items = load_items(args.dataset);
    auto backends = make_backends(cfg);
    check_against_world(items, backends);
    if (args.dry_run) {
      out << "dry run ok: " << items.size() << " questions, config valid, no backend calls issued\n";
      return int{kOk};
    }

    const auto started = utc_now();
    const auto t0 = std::chrono::steady_clock::now();
    auto run = run_dataset(items, cfg, *backends.video, *backends.text);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    RunReport report;
    report.config = to_json(cfg);
    report.aggregates = compute_aggregates(run.records, cfg.n_samples, cfg.strict);
    json per_question = json::object();
    for (std::size_t i = 0; i < run.records.size(); ++i) per_question[run.records[i].id] = run.wall_ms[i];
    report.timestamps = {{"started_at", started},
                         {"finished_at", utc_now()},
                         {"wall_seconds", seconds},
                         {"question_wall_ms", std::move(per_question)}};
    report.records = std::move(run.records);
    write_report(args.out, report);

    const auto& a = report.aggregates;
    out << "questions " << a.n_questions << "  accuracy " << a.accuracy << "  majority " << a.majority_accuracy
        << "  divergent " << a.divergence_pct << "  failed " << a.n_failed << '\n';

    std::size_t transport_failures = 0;
    for (const auto& r : report.records)
      if (r.failed && r.failure == "TransportError") ++transport_failures;
    if (transport_failures > 0) {
      return report_error(err, "TransportError",
                          std::to_string(transport_failures) + " question(s) failed: backend unreachable",
                          kTransport);
    }
    return int{kOk};
  });
}

int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    SweepAxis axis;
    try {
      axis = parse_sweep_axis(args.axis);
    } catch (const InvalidArgument& e) {
      return report_error(err, "UsageError", e.what(), kUsage);
    }
    if (args.values.empty()) return report_error(err, "UsageError", "--values is empty", kUsage);
    const auto doc = config_document(args);
    for (const auto& v : args.values) config_from_json(apply_axis(doc, axis, v));
    const auto cfg = config_from_json(doc);
    const auto items = load_items(args.dataset);
    auto backends = make_backends(cfg);
    check_against_world(items, backends);

    const auto result = sweep(doc, axis, args.values, items, *backends.video, *backends.text);
    std::filesystem::create_directories(args.out);
    for (const auto& p : result.points) {
      write_report(args.out / (std::string(to_string(axis)) + "=" + p.value), p.report);
      out << to_string(axis) << '=' << p.value << "  accuracy " << p.report.aggregates.accuracy << "  majority "
          << p.report.aggregates.majority_accuracy << '\n';
    }
    std::ofstream csv(args.out / "sweep.csv", std::ios::binary);
    if (!csv) throw IoError("cannot write " + (args.out / "sweep.csv").string());
    csv << sweep_csv(result);
    return int{kOk};
  });
}

namespace {
volatile std::sig_atomic_t g_stop_requested = 0;
extern "C" void handle_stop_signal(int) { g_stop_requested = 1; }
}  // namespace

int cmd_simserve(const SimServeArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto world = std::make_shared<const sim::World>(sim::load_world(args.world));
    sim::SimServer server(world);
    const int port = server.start(args.host, args.port);
    out << "serving " << world->questions.size() << " questions on http://" << args.host << ':' << port << std::endl;
    g_stop_requested = 0;
    std::signal(SIGINT, handle_stop_signal);
    std::signal(SIGTERM, handle_stop_signal);
    while (!g_stop_requested) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
    out << "served " << server.video_requests() << " video_qa and " << server.text_requests()
        << " text_lm requests (" << server.failed_requests() << " failed)" << std::endl;
    return int{kOk};
  });
}

int cmd_gen_world(const GenWorldArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    sim::GeneratorParams params;
    if (args.preset == "reference") params = sim::reference_preset();
    else if (args.preset == "independent") params = sim::independent_preset(0.3, 0.3);
    else if (args.preset == "mixture") params = sim::independent_preset(0.1, 0.9);
    else if (args.preset == "localization") params = sim::localization_preset();
    else return report_error(err, "UsageError", "unknown preset '" + args.preset + "'", kUsage);
    if (args.questions) params.n_questions = *args.questions;
    if (args.seed) params.seed = *args.seed;

    const auto world = sim::generate_world(params);
    std::filesystem::create_directories(args.out);
    sim::save_world(args.out / "world.json", world);
    write_dataset(args.out / "dataset.jsonl", world.dataset());
    RunConfig cfg;
    cfg.backend.world = "world.json";
    std::ofstream cfg_out(args.out / "config.json", std::ios::binary);
    if (!cfg_out) throw IoError("cannot write config.json");
    cfg_out << to_json(cfg).dump(2) << '\n';
    out << "wrote " << world.questions.size() << " questions to " << args.out.string() << '\n';
    return int{kOk};
  });
}

}  // namespace vsr::cli
