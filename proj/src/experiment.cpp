#include "dsgpa/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/core.h>
#include <yaml-cpp/yaml.h>

#include "dsgpa/random.hpp"
#include "dsgpa/trace_io.hpp"

namespace fs = std::filesystem;

namespace dsgpa {

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& msg) const {
    throw ConfigError(fmt::format("{}:{}: {}", source_, line_of(node), msg));
  }

  static int line_of(const YAML::Node& node) { return node.Mark().line >= 0 ? node.Mark().line + 1 : 0; }

  void require_map(const YAML::Node& node, const std::string& what) const {
    if (!node.IsMap()) fail(node, fmt::format("'{}' must be a mapping", what));
  }

  void check_keys(const YAML::Node& node, const std::set<std::string>& allowed, const std::string& where) const {
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(kv.first, fmt::format("unknown key '{}' in {}", key, where));
    }
  }

  template <typename T>
  T get(const YAML::Node& parent, const std::string& key, T fallback) const {
    const YAML::Node node = parent[key];
    if (!node) return fallback;
    return as<T>(node, key);
  }

  template <typename T>
  T require(const YAML::Node& parent, const std::string& key) const {
    const YAML::Node node = parent[key];
    if (!node) fail(parent, fmt::format("missing required key '{}'", key));
    return as<T>(node, key);
  }

  template <typename T>
  T as(const YAML::Node& node, const std::string& key) const {
    if (!node.IsScalar()) fail(node, fmt::format("'{}' must be a scalar", key));
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, fmt::format("'{}' has an invalid value '{}'", key, node.Scalar()));
    }
  }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
};

bool valid_label(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'; });
}

std::string gamma_tag(double g) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", g);
  return buf;
}

GraphSpec parse_graph(const Reader& rd, const YAML::Node& node) {
  rd.require_map(node, "graph");
  GraphSpec g;
  g.line = Reader::line_of(node);
  const auto type = rd.require<std::string>(node, "type");
  if (type == "file") {
    rd.check_keys(node, {"type", "path"}, "graph");
    g.kind = GraphSpec::Kind::file;
    g.path = rd.require<std::string>(node, "path");
    return g;
  }
  if (type == "erdos_renyi") {
    rd.check_keys(node, {"type", "n", "prob", "seed"}, "graph");
    g.kind = GraphSpec::Kind::erdos_renyi;
    g.prob = rd.get<double>(node, "prob", 0.4);
    if (!(g.prob > 0.0 && g.prob <= 1.0)) rd.fail(node["prob"], "graph.prob must lie in (0, 1]");
    g.seed = rd.get<std::uint64_t>(node, "seed", 0);
  } else if (type == "complete" || type == "path") {
    rd.check_keys(node, {"type", "n"}, "graph");
    g.kind = type == "complete" ? GraphSpec::Kind::complete : GraphSpec::Kind::path;
  } else {
    rd.fail(node["type"], fmt::format("unknown graph type '{}' (expected file, erdos_renyi, complete or path)", type));
  }
  g.n = rd.require<Index>(node, "n");
  if (g.n < 2) rd.fail(node["n"], "graph.n must be >= 2");
  return g;
}

ProblemSpec parse_problem(const Reader& rd, const YAML::Node& node) {
  rd.require_map(node, "problem");
  ProblemSpec p;
  p.line = Reader::line_of(node);
  p.name = rd.require<std::string>(node, "name");
  p.sigma = rd.get<double>(node, "sigma", 0.0);
  if (!(p.sigma >= 0.0)) rd.fail(node["sigma"], "problem.sigma must be >= 0");
  p.seed = rd.get<std::uint64_t>(node, "seed", 0);
  if (p.name == "quadratic") {
    rd.check_keys(node, {"name", "p", "sigma", "seed", "condition_number", "heterogeneity"}, "problem");
    p.p = rd.get<Index>(node, "p", 5);
    p.condition_number = rd.get<double>(node, "condition_number", 10.0);
    p.heterogeneity = rd.get<double>(node, "heterogeneity", 1.0);
    if (!(p.condition_number >= 1.0)) rd.fail(node["condition_number"], "condition_number must be >= 1");
    if (!(p.heterogeneity >= 0.0)) rd.fail(node["heterogeneity"], "heterogeneity must be >= 0");
  } else if (p.name == "nonconvex") {
    rd.check_keys(node, {"name", "p", "sigma", "seed", "lambda", "rows"}, "problem");
    p.p = rd.get<Index>(node, "p", 5);
    p.lambda = rd.get<double>(node, "lambda", 1.0);
    p.rows = rd.get<Index>(node, "rows", 0);
    if (!(p.lambda >= 0.0)) rd.fail(node["lambda"], "lambda must be >= 0");
  } else if (p.name == "two_layer_sigmoid") {
    rd.check_keys(node,
                  {"name", "sigma", "seed", "dataset", "path", "samples", "features", "spread", "hidden", "classes",
                   "weight_radius"},
                  "problem");
    p.dataset = rd.get<std::string>(node, "dataset", "blobs");
    if (p.dataset == "csv") {
      p.dataset_path = rd.require<std::string>(node, "path");
    } else if (p.dataset != "blobs") {
      rd.fail(node["dataset"], fmt::format("unknown dataset '{}' (expected blobs or csv)", p.dataset));
    }
    p.samples = rd.get<Index>(node, "samples", 500);
    p.features = rd.get<Index>(node, "features", 8);
    p.spread = rd.get<double>(node, "spread", 0.5);
    p.hidden = rd.get<Index>(node, "hidden", 50);
    p.classes = rd.get<int>(node, "classes", 10);
    p.weight_radius = rd.get<double>(node, "weight_radius", 10.0);
    if (p.hidden < 1 || p.classes < 1) rd.fail(node, "hidden and classes must be >= 1");
  } else {
    rd.fail(node["name"], fmt::format("unknown problem '{}' (expected quadratic, nonconvex or two_layer_sigmoid)", p.name));
  }
  if (p.p < 1) rd.fail(node["p"], "problem.p must be >= 1");
  return p;
}

AlgorithmSpec parse_algorithm_entry(const Reader& rd, const YAML::Node& node) {
  rd.require_map(node, "algorithms entry");
  rd.check_keys(node,
                {"name", "label", "eta", "alpha", "beta", "gamma", "batch", "schedule", "kappa1", "kappa2", "decay",
                 "momentum"},
                "algorithm");
  AlgorithmSpec a;
  a.line = Reader::line_of(node);
  const auto name = rd.require<std::string>(node, "name");
  try {
    a.algo = parse_algorithm(name);
  } catch (const std::invalid_argument& e) {
    rd.fail(node["name"], e.what());
  }
  a.label = rd.get<std::string>(node, "label", name);
  if (!valid_label(a.label)) rd.fail(node["label"], fmt::format("label '{}' may only use [A-Za-z0-9_.-]", a.label));

  HyperParams& hp = a.hp;
  const auto schedule = rd.get<std::string>(node, "schedule", "fixed");
  try {
    hp.mode = parse_schedule_mode(schedule);
  } catch (const std::invalid_argument& e) {
    rd.fail(node["schedule"], e.what());
  }
  hp.eta = rd.get<double>(node, "eta", hp.eta);
  hp.alpha = rd.get<double>(node, "alpha", hp.alpha);
  hp.beta = rd.get<double>(node, "beta", hp.beta);
  hp.batch = rd.get<int>(node, "batch", 1);
  hp.decay = rd.get<double>(node, "decay", hp.decay);
  hp.momentum = rd.get<double>(node, "momentum", hp.momentum);
  if (hp.batch < 1) rd.fail(node["batch"], "batch must be >= 1");
  if (!(hp.eta > 0.0)) rd.fail(node["eta"], "eta must be positive");
  const double gamma = rd.get<double>(node, "gamma", 1.0);
  try {
    hp.gamma = Gamma(gamma);
  } catch (const std::invalid_argument& e) {
    rd.fail(node["gamma"], e.what());
  }
  if (hp.mode == ScheduleMode::theorem1) {
    hp.kappa1 = rd.require<double>(node, "kappa1");
    hp.kappa2 = rd.require<double>(node, "kappa2");
  } else {
    hp.kappa1 = rd.get<double>(node, "kappa1", 0.0);
    hp.kappa2 = rd.get<double>(node, "kappa2", 0.0);
  }
  return a;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  Reader rd(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(fmt::format("{}:{}: {}", source, e.mark.line + 1, e.msg));
  }
  if (!root.IsMap()) throw ConfigError(fmt::format("{}:1: configuration must be a mapping", source));
  rd.check_keys(root,
                {"format_version", "graph", "problem", "algorithms", "T", "trace_every", "seeds", "master_seed",
                 "output", "gamma_sweep", "lyapunov", "fstar", "fstar_slack", "timing"},
                "configuration");

  ExperimentConfig cfg;
  cfg.source = source;
  cfg.format_version = rd.require<int>(root, "format_version");
  if (cfg.format_version != kConfigFormatVersion)
    rd.fail(root["format_version"],
            fmt::format("unsupported format_version {} (this build reads {})", cfg.format_version, kConfigFormatVersion));

  if (!root["graph"]) rd.fail(root, "missing required section 'graph'");
  cfg.graph = parse_graph(rd, root["graph"]);
  if (!root["problem"]) rd.fail(root, "missing required section 'problem'");
  cfg.problem = parse_problem(rd, root["problem"]);

  const YAML::Node algos = root["algorithms"];
  if (!algos) rd.fail(root, "missing required section 'algorithms'");
  if (!algos.IsSequence() || algos.size() == 0) rd.fail(algos, "'algorithms' must be a non-empty list");
  std::set<std::string> labels;
  for (const auto& entry : algos) {
    cfg.algorithms.push_back(parse_algorithm_entry(rd, entry));
    if (!labels.insert(cfg.algorithms.back().label).second)
      rd.fail(entry, fmt::format("duplicate algorithm label '{}'", cfg.algorithms.back().label));
  }

  cfg.iterations = rd.require<std::int64_t>(root, "T");
  if (cfg.iterations < 1) rd.fail(root["T"], fmt::format("T must be >= 1, got {}", cfg.iterations));
  cfg.trace_every = rd.get<std::int64_t>(root, "trace_every", 1);
  if (cfg.trace_every < 1) rd.fail(root["trace_every"], "trace_every must be >= 1");

  const YAML::Node seeds = root["seeds"];
  if (!seeds) rd.fail(root, "missing required key 'seeds'");
  if (!seeds.IsSequence() || seeds.size() == 0) rd.fail(seeds, "'seeds' must be a non-empty list");
  std::set<std::uint64_t> unique_seeds;
  for (const auto& s : seeds) {
    cfg.seeds.push_back(rd.as<std::uint64_t>(s, "seeds"));
    if (!unique_seeds.insert(cfg.seeds.back()).second) rd.fail(s, "duplicate seed");
  }
  cfg.master_seed = rd.get<std::uint64_t>(root, "master_seed", 0);
  cfg.output_dir = rd.get<std::string>(root, "output", "out");

  if (const YAML::Node sweep = root["gamma_sweep"]) {
    if (!sweep.IsSequence() || sweep.size() == 0) rd.fail(sweep, "'gamma_sweep' must be a non-empty list");
    for (const auto& g : sweep) {
      const double v = rd.as<double>(g, "gamma_sweep");
      if (!(v >= 0.0 && v <= 1.0)) rd.fail(g, fmt::format("gamma {} outside [0, 1]", v));
      cfg.gamma_sweep.push_back(v);
    }
    const bool any_pb = std::any_of(cfg.algorithms.begin(), cfg.algorithms.end(),
                                    [](const AlgorithmSpec& a) { return a.algo == Algorithm::dsgpa_f_pb; });
    if (!any_pb) rd.fail(sweep, "gamma_sweep needs at least one dsgpa_f_pb algorithm entry");
  }
  cfg.lyapunov = rd.get<bool>(root, "lyapunov", false);
  if (root["fstar"]) cfg.fstar = rd.as<double>(root["fstar"], "fstar");
  cfg.fstar_slack = rd.get<double>(root, "fstar_slack", 1e-3);
  cfg.timing = rd.get<bool>(root, "timing", false);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open config '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

namespace {

[[noreturn]] void fail_at(const ExperimentConfig& cfg, int line, const std::string& msg) {
  throw ConfigError(fmt::format("{}:{}: {}", cfg.source, line, msg));
}

}  // namespace

ExperimentSetup build_setup(const ExperimentConfig& cfg) {
  ExperimentSetup setup;
  try {
    switch (cfg.graph.kind) {
      case GraphSpec::Kind::file: {
        fs::path path(cfg.graph.path);
        if (path.is_relative()) path = fs::path(cfg.source).parent_path() / path;
        setup.network = std::make_shared<Network>(load_graph(path.string()));
        break;
      }
      case GraphSpec::Kind::erdos_renyi:
        setup.network = std::make_shared<Network>(erdos_renyi(cfg.graph.n, cfg.graph.prob, cfg.graph.seed));
        break;
      case GraphSpec::Kind::complete: setup.network = std::make_shared<Network>(complete_graph(cfg.graph.n)); break;
      case GraphSpec::Kind::path: setup.network = std::make_shared<Network>(path_graph(cfg.graph.n)); break;
    }
  } catch (const IoError&) {
    throw;
  } catch (const std::exception& e) {
    fail_at(cfg, cfg.graph.line, fmt::format("graph: {}", e.what()));
  }
  if (!setup.network->connected()) fail_at(cfg, cfg.graph.line, "graph: communication graph must be connected");

  const Index n = setup.network->size();
  const ProblemSpec& ps = cfg.problem;
  try {
    if (ps.name == "quadratic") {
      setup.problem = quadratic_problem(n, ps.p, ps.condition_number, ps.heterogeneity, ps.sigma, ps.seed);
    } else if (ps.name == "nonconvex") {
      NonconvexOptions opt;
      opt.lambda = ps.lambda;
      opt.rows = ps.rows;
      setup.problem = nonconvex_problem(n, ps.p, ps.sigma, ps.seed, opt);
    } else {
      Dataset data;
      if (ps.dataset == "csv") {
        fs::path path(ps.dataset_path);
        if (path.is_relative()) path = fs::path(cfg.source).parent_path() / path;
        data = load_dataset_csv(path.string(), ps.classes);
      } else {
        data = gaussian_blobs(ps.samples, ps.features, ps.classes, ps.spread, ps.dataset_seed);
      }
      SigmoidNetOptions opt;
      opt.hidden = ps.hidden;
      opt.classes = ps.classes;
      opt.sigma = ps.sigma;
      opt.shuffle_seed = ps.seed;
      opt.weight_radius = ps.weight_radius;
      setup.problem = std::make_shared<TwoLayerSigmoidProblem>(data, n, opt);
    }
  } catch (const IoError&) {
    throw;
  } catch (const std::exception& e) {
    fail_at(cfg, ps.line, fmt::format("problem: {}", e.what()));
  }
  return setup;
}

std::vector<RunPlan> expand_runs(const ExperimentConfig& cfg, const Network& net) {
  std::vector<RunPlan> plans;
  std::set<std::string> labels;
  for (const AlgorithmSpec& spec : cfg.algorithms) {
    HyperParams hp = spec.hp;
    if (hp.mode == ScheduleMode::theorem1) {
      try {
        HyperParams sched = theorem1_schedule(net, cfg.iterations, spec.hp.kappa1, spec.hp.kappa2);
        sched.gamma = spec.hp.gamma;
        sched.batch = spec.hp.batch;
        sched.decay = spec.hp.decay;
        sched.momentum = spec.hp.momentum;
        hp = sched;
      } catch (const ScheduleError& e) {
        fail_at(cfg, spec.line, fmt::format("algorithm '{}': {}", spec.label, e.what()));
      }
    }

    std::vector<std::pair<std::string, HyperParams>> variants;
    if (spec.algo == Algorithm::dsgpa_f_pb && !cfg.gamma_sweep.empty()) {
      for (double g : cfg.gamma_sweep) {
        HyperParams h = hp;
        h.gamma = Gamma(g);
        variants.emplace_back(fmt::format("{}_g{}", spec.label, gamma_tag(g)), h);
      }
    } else {
      variants.emplace_back(spec.label, hp);
    }

    for (auto& [label, h] : variants) {
      if (!labels.insert(label).second) fail_at(cfg, spec.line, fmt::format("run label '{}' is not unique", label));
      for (std::uint64_t seed : cfg.seeds) {
        RunPlan plan;
        plan.label = label;
        plan.algo = spec.algo;
        plan.hp = h;
        plan.seed = seed;
        plan.run_seed = derive_seed(cfg.master_seed, {seed});
        plan.trace_file = fmt::format("trace_{}_s{}.csv", label, seed);
        plans.push_back(std::move(plan));
      }
    }
  }
  return plans;
}

void validate_config(const ExperimentConfig& cfg) {
  const ExperimentSetup setup = build_setup(cfg);
  expand_runs(cfg, *setup.network);
}

namespace {

template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), count));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t idx = next++; idx < count; idx = next++) {
      try {
        fn(idx);
      } catch (...) {
        errors[idx] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

const char* kSummaryHeader = "label,algorithm,gamma,seed,status,iterations,diverged_at,consensus_err,grad_norm_2,grad_norm_pg,fbar,trace_file";

}  // namespace

std::vector<RunSummary> run_experiment(const ExperimentConfig& cfg, const std::string& out_dir, int jobs) {
  const ExperimentSetup setup = build_setup(cfg);
  const Network& net = *setup.network;
  const Problem& prob = *setup.problem;
  const std::vector<RunPlan> plans = expand_runs(cfg, net);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError(fmt::format("cannot create output directory '{}': {}", out_dir, ec.message()));

  auto options_for = [&](const RunPlan& plan) {
    RunOptions opt;
    opt.iterations = cfg.iterations;
    opt.seed = plan.run_seed;
    opt.trace_every = cfg.trace_every;
    opt.record_wall_time = cfg.timing;
    return opt;
  };

  std::optional<double> fstar = cfg.fstar;
  if (cfg.lyapunov && !fstar) fstar = prob.optimum_hint().f_star;
  if (cfg.lyapunov && !fstar) {
    // No certified optimum: take the best f(xbar) seen by any run, minus slack.
    std::vector<double> best(plans.size(), std::numeric_limits<double>::infinity());
    parallel_for(plans.size(), jobs, [&](std::size_t idx) {
      const RunResult r = run(plans[idx].algo, net, prob, plans[idx].hp, options_for(plans[idx]));
      for (const auto& rec : r.trace)
        if (std::isfinite(rec.fbar)) best[idx] = std::min(best[idx], rec.fbar);
    });
    const double lowest = *std::min_element(best.begin(), best.end());
    if (!std::isfinite(lowest)) fail_at(cfg, 1, "lyapunov: no finite objective value observed to anchor f*");
    fstar = lowest - cfg.fstar_slack;
  }

  std::vector<RunSummary> summaries(plans.size());
  parallel_for(plans.size(), jobs, [&](std::size_t idx) {
    const RunPlan& plan = plans[idx];
    RunOptions opt = options_for(plan);
    if (cfg.lyapunov) opt.lyapunov_fstar = fstar;
    const RunResult r = run(plan.algo, net, prob, plan.hp, opt);
    save_trace_csv((fs::path(out_dir) / plan.trace_file).string(), r.trace);
    RunSummary& s = summaries[idx];
    s.plan = plan;
    s.diverged = r.diverged;
    s.diverged_at = r.diverged_at;
    s.iterations = r.final_state.k;
    s.final_record = r.trace.back();
  });

  save_graph((fs::path(out_dir) / "graph.txt").string(), net);

  const std::string summary_path = (fs::path(out_dir) / "summary.csv").string();
  std::ofstream out(summary_path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write '{}'", summary_path));
  out << kSummaryHeader << '\n';
  for (const RunSummary& s : summaries) {
    const TraceRecord& f = s.final_record;
    out << s.plan.label << ',' << to_string(s.plan.algo) << ',' << format_real(s.plan.hp.gamma.value()) << ','
        << s.plan.seed << ',' << (s.diverged ? "diverged" : "completed") << ',' << s.iterations << ',' << s.diverged_at
        << ',' << format_real(f.consensus_err) << ',' << format_real(f.grad_norm_2) << ','
        << format_real(f.grad_norm_pg) << ',' << format_real(f.fbar) << ',' << s.plan.trace_file << '\n';
  }
  if (!out) throw IoError(fmt::format("failed writing '{}'", summary_path));
  return summaries;
}

namespace {

struct Stat {
  std::vector<double> values;

  double mean() const {
    double acc = 0;
    for (double v : values) acc += v;
    return values.empty() ? NAN : acc / static_cast<double>(values.size());
  }
  // Sample standard deviation; 0 for a single value.
  double stddev() const {
    if (values.size() < 2) return values.empty() ? NAN : 0.0;
    const double m = mean();
    double acc = 0;
    for (double v : values) acc += (v - m) * (v - m);
    return std::sqrt(acc / static_cast<double>(values.size() - 1));
  }
};

struct Group {
  std::string label;
  std::string algorithm;
  int runs = 0;
  int diverged = 0;
  Stat consensus, grad2, fbar;
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void summarize(const std::string& out_dir, std::ostream& os) {
  const fs::path summary_path = fs::path(out_dir) / "summary.csv";
  if (!fs::is_directory(out_dir)) throw IoError(fmt::format("'{}' is not a directory", out_dir));
  std::ifstream in(summary_path);
  if (!in) throw std::runtime_error(fmt::format("no traces found in '{}' (summary.csv missing)", out_dir));

  std::string line;
  std::getline(in, line);
  if (line.rfind(kSummaryHeader, 0) != 0) throw std::runtime_error(fmt::format("'{}' has an unexpected header", summary_path.string()));

  std::vector<Group> groups;
  std::map<std::string, std::size_t> index;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 12) throw std::runtime_error(fmt::format("malformed summary row '{}'", line));
    const fs::path trace_path = fs::path(out_dir) / f[11];
    const auto trace = load_trace_csv(trace_path.string());
    if (trace.empty()) throw std::runtime_error(fmt::format("trace '{}' has no rows", trace_path.string()));

    auto [it, inserted] = index.emplace(f[0], groups.size());
    if (inserted) groups.push_back(Group{f[0], f[1]});
    Group& g = groups[it->second];
    ++g.runs;
    if (f[4] == "diverged") {
      ++g.diverged;
      continue;
    }
    const TraceRecord& last = trace.back();
    g.consensus.values.push_back(last.consensus_err);
    g.grad2.values.push_back(last.grad_norm_2);
    g.fbar.values.push_back(last.fbar);
  }
  if (groups.empty()) throw std::runtime_error(fmt::format("no traces found in '{}'", out_dir));

  auto cell = [](const Stat& s) {
    return s.values.empty() ? std::string("-") : fmt::format("{:.6e} ± {:.2e}", s.mean(), s.stddev());
  };
  os << fmt::format("{:<24} {:<11} {:>4} {:>8}  {:<23} {:<23} {:<23}\n", "label", "algorithm", "runs", "diverged",
                    "consensus_err", "grad_norm_2", "fbar");
  for (const Group& g : groups)
    os << fmt::format("{:<24} {:<11} {:>4} {:>8}  {:<23} {:<23} {:<23}\n", g.label, g.algorithm, g.runs, g.diverged,
                      cell(g.consensus), cell(g.grad2), cell(g.fbar));
}

}  // namespace dsgpa
