// Experiment runner.
//
//   dsgpa run <config> [--out DIR] [--jobs N]
//   dsgpa summarize <dir>
//   dsgpa validate <config>
//
// Exit codes: 0 success, 1 usage or config error, 2 I/O error.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dsgpa/experiment.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigFailure = 1;
constexpr int kIoFailure = 2;

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return kOk;
  } catch (const dsgpa::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const dsgpa::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed stochastic primal-dual optimization experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir, summary_dir;
  int jobs = 1;

  auto* run_cmd = app.add_subcommand("run", "Run every (algorithm, seed) pair of a config");
  run_cmd->add_option("config", config_path, "Experiment config (YAML)")->required();
  run_cmd->add_option("--out", out_dir, "Output directory (default: the config's 'output' key)");
  run_cmd->add_option("--jobs", jobs, "Runs executed in parallel")->check(CLI::PositiveNumber);

  auto* sum_cmd = app.add_subcommand("summarize", "Print mean and std of final metrics per label");
  sum_cmd->add_option("dir", summary_dir, "Directory written by 'run'")->required();

  auto* val_cmd = app.add_subcommand("validate", "Check a config without running it");
  val_cmd->add_option("config", config_path, "Experiment config (YAML)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigFailure;
  }

  if (*run_cmd) {
    return guarded([&] {
      const auto cfg = dsgpa::load_config(config_path);
      const std::string dir = out_dir.empty() ? cfg.output_dir : out_dir;
      const auto runs = dsgpa::run_experiment(cfg, dir, jobs);
      std::size_t diverged = 0;
      for (const auto& r : runs) diverged += r.diverged ? 1 : 0;
      std::cout << runs.size() << " runs written to " << dir;
      if (diverged) std::cout << " (" << diverged << " diverged)";
      std::cout << '\n';
    });
  }
  if (*sum_cmd) return guarded([&] { dsgpa::summarize(summary_dir, std::cout); });
  return guarded([&] {
    const auto cfg = dsgpa::load_config(config_path);
    dsgpa::validate_config(cfg);
    std::cout << config_path << ": ok\n";
  });
}
