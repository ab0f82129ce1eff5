#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsgpa/algorithms.hpp"
#include "dsgpa/hyperparams.hpp"
#include "dsgpa/netgraph.hpp"
#include "dsgpa/problems.hpp"

namespace dsgpa {

inline constexpr int kConfigFormatVersion = 1;

// Invalid experiment configuration. The message carries "source:line: ".
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GraphSpec {
  enum class Kind { file, erdos_renyi, complete, path };
  Kind kind = Kind::erdos_renyi;
  std::string path;
  Index n = 10;
  double prob = 0.4;
  std::uint64_t seed = 0;
  int line = 0;
};

struct ProblemSpec {
  std::string name = "quadratic";
  Index p = 5;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  // quadratic
  double condition_number = 10.0;
  double heterogeneity = 1.0;
  // nonconvex
  double lambda = 1.0;
  Index rows = 0;
  // two_layer_sigmoid
  std::string dataset = "blobs";
  std::string dataset_path;
  Index samples = 500;
  Index features = 8;
  double spread = 0.5;
  std::uint64_t dataset_seed = 0;
  Index hidden = 50;
  int classes = 10;
  double weight_radius = 10.0;
  int line = 0;
};

struct AlgorithmSpec {
  Algorithm algo = Algorithm::dsgpa_f_pb;
  std::string label;
  HyperParams hp;
  int line = 0;
};

struct ExperimentConfig {
  int format_version = kConfigFormatVersion;
  GraphSpec graph;
  ProblemSpec problem;
  std::vector<AlgorithmSpec> algorithms;
  std::int64_t iterations = 0;
  std::int64_t trace_every = 1;
  std::vector<std::uint64_t> seeds;
  std::uint64_t master_seed = 0;
  std::string output_dir = "out";
  std::vector<double> gamma_sweep;
  bool lyapunov = false;
  std::optional<double> fstar;
  double fstar_slack = 1e-3;
  bool timing = false;
  std::string source = "<config>";
};

// YAML text -> config, with structural and range checks. Errors name the
// offending line.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

// Everything an experiment needs, resolved from a config.
struct ExperimentSetup {
  std::shared_ptr<const Network> network;
  std::shared_ptr<const Problem> problem;
};

// Builds the network and problem; turns build failures into ConfigError.
ExperimentSetup build_setup(const ExperimentConfig& config);

struct RunPlan {
  std::string label;
  Algorithm algo = Algorithm::dsgpa_f_pb;
  HyperParams hp;
  std::uint64_t seed = 0;      // user-facing seed from the config
  std::uint64_t run_seed = 0;  // derive_seed(master_seed, {seed})
  std::string trace_file;
};

// One plan per (algorithm entry [x gamma_sweep], seed), in config order.
// Resolves theorem1 schedules against the network.
std::vector<RunPlan> expand_runs(const ExperimentConfig& config, const Network& net);

// Full validation: parse checks plus setup and schedule feasibility.
void validate_config(const ExperimentConfig& config);

struct RunSummary {
  RunPlan plan;
  bool diverged = false;
  std::int64_t diverged_at = -1;
  std::int64_t iterations = 0;
  TraceRecord final_record;
};

// Runs every plan (up to `jobs` in parallel), writes one trace CSV per run,
// summary.csv and graph.txt into out_dir. Output bytes depend only on the
// config.
std::vector<RunSummary> run_experiment(const ExperimentConfig& config, const std::string& out_dir, int jobs = 1);

// Reads out_dir/summary.csv and the traces it lists, prints per-label
// mean +- std of the final metrics over non-diverged runs. Throws
// std::runtime_error when no traces are found.
void summarize(const std::string& out_dir, std::ostream& os);

}  // namespace dsgpa
