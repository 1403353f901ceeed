#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vsr::cli {

/// Process exit codes. Each failure class gets its own code.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kConfig = 3,
  kSchema = 4,
  kTransport = 5,
  kIo = 6,
};

struct CommonArgs {
  std::filesystem::path config;
  std::filesystem::path dataset;
  std::filesystem::path out;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;  // section.key=value
};

struct RunArgs : CommonArgs {
  bool dry_run = false;
};

struct SweepArgs : CommonArgs {
  std::string axis;
  std::vector<std::string> values;
};

struct SimServeArgs {
  std::filesystem::path world;
  std::string host = "127.0.0.1";
  int port = 8080;
};

struct GenWorldArgs {
  std::filesystem::path out;
  std::string preset = "reference";
  std::optional<int> questions;
  std::optional<std::uint64_t> seed;
};

// Each command reports failures as a one-line JSON object on `err` and
// returns the matching exit code.
int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err);
int cmd_simserve(const SimServeArgs& args, std::ostream& out, std::ostream& err);
int cmd_gen_world(const GenWorldArgs& args, std::ostream& out, std::ostream& err);

}  // namespace vsr::cli
