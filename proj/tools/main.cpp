#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

void add_common(CLI::App* cmd, vsr::cli::CommonArgs& a) {
  cmd->add_option("--config", a.config, "run config (JSON)")->required();
  cmd->add_option("--dataset", a.dataset, "questions (JSONL)")->required();
  cmd->add_option("--out", a.out, "output directory")->required();
  cmd->add_option("--workers", a.workers, "parallel questions");
  cmd->add_option("--seed", a.seed, "run seed");
  cmd->add_option("--set", a.overrides, "config override, section.key=value (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Best-of-N answer selection for long-video multiple-choice QA"};
  app.require_subcommand(1);

  vsr::cli::RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "answer every question in a dataset");
  add_common(run_cmd, run);
  run_cmd->add_flag("--dry-run", run.dry_run, "validate inputs without calling the backend");

  vsr::cli::SweepArgs sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "repeat a run over values of one parameter");
  add_common(sweep_cmd, sw);
  sweep_cmd->add_option("--axis", sw.axis, "alpha, beta, frames, n_samples or confidence_variant")->required();
  sweep_cmd->add_option("--values", sw.values, "comma-separated values")->required()->delimiter(',');

  vsr::cli::SimServeArgs serve;
  auto* serve_cmd = app.add_subcommand("simserve", "serve a simulated world over HTTP");
  serve_cmd->add_option("--world", serve.world, "world file (JSON)")->required();
  serve_cmd->add_option("--host", serve.host, "bind address");
  serve_cmd->add_option("--port", serve.port, "port, 0 picks a free one");

  vsr::cli::GenWorldArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-world", "generate a simulated world, dataset and config");
  gen_cmd->add_option("--out", gen.out, "output directory")->required();
  gen_cmd->add_option("--preset", gen.preset, "reference, independent, mixture or localization");
  gen_cmd->add_option("--questions", gen.questions, "number of questions");
  gen_cmd->add_option("--seed", gen.seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return vsr::cli::kUsage;
  }

  if (*run_cmd) return vsr::cli::cmd_run(run, std::cout, std::cerr);
  if (*sweep_cmd) return vsr::cli::cmd_sweep(sw, std::cout, std::cerr);
  if (*serve_cmd) return vsr::cli::cmd_simserve(serve, std::cout, std::cerr);
  if (*gen_cmd) return vsr::cli::cmd_gen_world(gen, std::cout, std::cerr);
  return vsr::cli::kUsage;
}
