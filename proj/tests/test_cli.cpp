#include <doctest.h>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "commands.hpp"
#include "vsr/sim_backend.hpp"
#include "vsr/sim_world.hpp"

using namespace vsr::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Workspace {
  fs::path dir;
  Workspace() {
    static int counter = 0;
    dir = fs::temp_directory_path() / ("vsr_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    GenWorldArgs gen;
    gen.out = dir;
    gen.questions = 50;
    std::ostringstream out, err;
    REQUIRE(cmd_gen_world(gen, out, err) == kOk);
  }
  ~Workspace() { fs::remove_all(dir); }

  RunArgs run_args(const std::string& out_name) const {
    RunArgs a;
    a.config = dir / "config.json";
    a.dataset = dir / "dataset.jsonl";
    a.out = dir / out_name;
    return a;
  }

  fs::path write_config(const std::string& name, const json& patch) const {
    json doc = json::parse(std::ifstream(dir / "config.json"));
    doc.merge_patch(patch);
    std::ofstream(dir / name) << doc.dump(2);
    return dir / name;
  }
};

json read_json(const fs::path& p) { return json::parse(std::ifstream(p)); }

int error_exit_code(const std::string& err) { return json::parse(err)["error"]["exit_code"].get<int>(); }

}  // namespace

TEST_CASE("run on a 50-question sim world writes reports") {
  Workspace ws;
  std::ostringstream out, err;
  CHECK(cmd_run(ws.run_args("out"), out, err) == kOk);
  CHECK(err.str().empty());
  const auto report = read_json(ws.dir / "out" / "report.json");
  CHECK(report["records"].size() == 50);
  CHECK(fs::exists(ws.dir / "out" / "summary.csv"));
}

TEST_CASE("identical runs give identical reports regardless of workers") {
  Workspace ws;
  std::ostringstream out, err;
  auto a = ws.run_args("a");
  a.workers = 1;
  auto b = ws.run_args("b");
  b.workers = 6;
  REQUIRE(cmd_run(a, out, err) == kOk);
  REQUIRE(cmd_run(b, out, err) == kOk);
  auto ra = read_json(ws.dir / "a" / "report.json");
  auto rb = read_json(ws.dir / "b" / "report.json");
  ra.erase("timestamps");
  rb.erase("timestamps");
  ra["config"]["run"].erase("workers");
  rb["config"]["run"].erase("workers");
  CHECK(ra.dump() == rb.dump());
}

TEST_CASE("dry run issues no backend calls") {
  Workspace ws;
  auto world = std::make_shared<const vsr::sim::World>(vsr::sim::load_world(ws.dir / "world.json"));
  vsr::sim::SimServer server(world);
  const std::string url = "http://127.0.0.1:" + std::to_string(server.start("127.0.0.1", 0));
  auto args = ws.run_args("out");
  args.config = ws.write_config("http.json", {{"backend", {{"kind", "http"}, {"video_endpoint", url}, {"text_endpoint", url}}}});
  args.dry_run = true;
  std::ostringstream out, err;
  CHECK(cmd_run(args, out, err) == kOk);
  CHECK(server.video_requests() == 0);
  CHECK(server.text_requests() == 0);
  CHECK_FALSE(fs::exists(ws.dir / "out"));

  // The same config without --dry-run really talks to the server.
  args.dry_run = false;
  args.workers = 4;
  CHECK(cmd_run(args, out, err) == kOk);
  CHECK(server.video_requests() >= 500);
  server.stop();
}

TEST_CASE("unreachable backend exits with the transport code") {
  Workspace ws;
  auto args = ws.run_args("out");
  args.config = ws.write_config("dead.json", {{"backend",
                                                {{"kind", "http"},
                                                 {"video_endpoint", "http://127.0.0.1:1"},
                                                 {"text_endpoint", "http://127.0.0.1:1"},
                                                 {"timeout_ms", 200},
                                                 {"retries", 1},
                                                 {"backoff_ms", 1}}}});
  std::ostringstream out, err;
  CHECK(cmd_run(args, out, err) == kTransport);
  CHECK(error_exit_code(err.str()) == kTransport);
  CHECK(json::parse(err.str())["error"]["kind"] == "TransportError");
}

TEST_CASE("error exit codes") {
  Workspace ws;
  std::ostringstream out;
  SUBCASE("malformed world is a schema error") {
    std::ofstream(ws.dir / "world.json") << R"({"schema_version":1,"seed":1,"videos":[{"video_id":"v"}]})";
    std::ostringstream err;
    CHECK(cmd_run(ws.run_args("out"), out, err) == kSchema);
    CHECK(error_exit_code(err.str()) == kSchema);
  }
  SUBCASE("bad config value") {
    auto args = ws.run_args("out");
    args.overrides = {"run.n_samples=0"};
    std::ostringstream err;
    CHECK(cmd_run(args, out, err) == kConfig);
  }
  SUBCASE("missing dataset") {
    auto args = ws.run_args("out");
    args.dataset = ws.dir / "nope.jsonl";
    std::ostringstream err;
    CHECK(cmd_run(args, out, err) == kIo);
  }
  SUBCASE("dataset question missing from the world") {
    std::ofstream(ws.dir / "dataset.jsonl", std::ios::app)
        << R"({"id":"zzz","video_id":"vid00000","n_frames":10,"fps":30,"question":"Q","options":["a","b"],"answer":"A"})"
        << '\n';
    std::ostringstream err;
    CHECK(cmd_run(ws.run_args("out"), out, err) == kSchema);
  }
}

TEST_CASE("sweep") {
  Workspace ws;
  SweepArgs args;
  static_cast<CommonArgs&>(args) = ws.run_args("sweep");
  std::ostringstream out;
  SUBCASE("unknown axis is a usage error") {
    args.axis = "gamma";
    args.values = {"1"};
    std::ostringstream err;
    CHECK(cmd_sweep(args, out, err) == kUsage);
    CHECK(error_exit_code(err.str()) == kUsage);
  }
  SUBCASE("frames axis writes one summary per value") {
    args.axis = "frames";
    args.values = {"8", "16", "32"};
    std::ostringstream err;
    REQUIRE(cmd_sweep(args, out, err) == kOk);
    for (const auto& v : args.values) CHECK(fs::exists(ws.dir / "sweep" / ("frames=" + v) / "summary.csv"));
    CHECK(fs::exists(ws.dir / "sweep" / "sweep.csv"));
  }
  SUBCASE("bad sweep value is rejected before running") {
    args.axis = "beta";
    args.values = {"1", "-2"};
    std::ostringstream err;
    CHECK(cmd_sweep(args, out, err) == kConfig);
  }
}

TEST_CASE("gen-world rejects unknown presets") {
  GenWorldArgs gen;
  gen.out = fs::temp_directory_path() / "vsr_gen_unused";
  gen.preset = "fantasy";
  std::ostringstream out, err;
  CHECK(cmd_gen_world(gen, out, err) == kUsage);
}

TEST_CASE("binary reports usage errors with exit code 2") {
  const std::string exe = VSR_BINARY;
  CHECK(WEXITSTATUS(std::system((exe + " >/dev/null 2>&1").c_str())) == kUsage);
  CHECK(WEXITSTATUS(std::system((exe + " run --config x >/dev/null 2>&1").c_str())) == kUsage);
  CHECK(WEXITSTATUS(std::system((exe + " frobnicate >/dev/null 2>&1").c_str())) == kUsage);
  CHECK(WEXITSTATUS(std::system((exe + " --help >/dev/null 2>&1").c_str())) == kOk);
}
