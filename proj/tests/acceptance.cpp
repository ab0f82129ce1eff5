// Acceptance suite. Each criterion prints one PASS/FAIL line.
//
//   acceptance                 run every criterion
//   acceptance 3 7             run selected criteria
//   acceptance --write-reference FILE
//                              regenerate the pinned hitting-time data

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "dsgpa/algorithms.hpp"
#include "dsgpa/datasets.hpp"
#include "dsgpa/diagnostics.hpp"
#include "dsgpa/powerball.hpp"
#include "dsgpa/random.hpp"
#include "dsgpa/trace_io.hpp"

using namespace dsgpa;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> body;
};

// kappa1 maximizing the admissible kappa2 on this network, kappa2 at `frac`
// of its bound.
std::pair<double, double> pick_kappas(const Network& net, double frac) {
  double best1 = 0.0, best2 = 0.0;
  for (double k1 = theorem1_bounds(net, 0.0).kappa1_min * 1.01; k1 < 50.0; k1 *= 1.03) {
    const double k2 = theorem1_bounds(net, k1).kappa2_max;
    if (k2 > best2) {
      best1 = k1;
      best2 = k2;
    }
  }
  return {best1, frac * best2};
}

std::string trace_bytes(const std::vector<TraceRecord>& trace) {
  std::ostringstream os;
  write_trace_csv(os, trace);
  return os.str();
}

// ---------------------------------------------------------------------------

Outcome powerball_energy_inequality() {
  SplitMix64 rng(20240601);
  std::uniform_real_distribution<double> gdist(0.5, 1.0);
  long violations = 0, holder_violations = 0;
  double worst = 0.0;
  std::string example;
  const long trials = 100000;
  for (long t = 0; t < trials; ++t) {
    const Index dim = 1 + Index(rng() % 64);
    const int family = int(rng() % 3);
    std::normal_distribution<double> normal;
    std::cauchy_distribution<double> cauchy;
    std::student_t_distribution<double> student(1.5);
    Vector v(dim);
    for (Index l = 0; l < dim; ++l) v(l) = family == 0 ? normal(rng) : family == 1 ? cauchy(rng) : student(rng);
    const Gamma g(gdist(rng));
    const double rhs = pnorm_squared(v, 1.0 + g.value());
    const double gap = lemma1_gap(v, g);
    if (gap < -1e-12 * (1.0 + rhs)) {
      ++violations;
      const double rel = -gap / (1.0 + rhs);
      if (rel > worst) {
        worst = rel;
        example = fmt::format("dim={} gamma={:.3f} ||sigma||^2={:.4g} ||v||^2_(1+g)={:.4g}", dim, g.value(),
                              rhs - gap, rhs);
      }
    }
    if (powerball(v, g).squaredNorm() > powerball_holder_bound(v, g) * (1 + 1e-12)) ++holder_violations;
  }
  // One-coordinate witness: v = [0.1], gamma = 1/2.
  Vector c(1);
  c << 0.1;
  const double witness = lemma1_gap(c, Gamma(0.5));
  return {violations == 0,
          fmt::format("{} / {} violations; worst {}; gap([0.1], 0.5) = {:.4g}; dimension-aware Hoelder bound: {} "
                      "violations",
                      violations, trials, example.empty() ? "-" : example, witness, holder_violations)};
}

Outcome dual_sum_conservation() {
  const Network net = erdos_renyi(10, 0.4, 2024);
  auto prob = nonconvex_problem(10, 10, 0.5, 11);
  const std::int64_t T = 10000;
  const auto [k1, k2] = pick_kappas(net, 0.5);
  HyperParams hp = theorem1_schedule(net, T, k1, k2);
  hp.gamma = Gamma(0.7);
  AlgoState s = initial_state(10, 10, init_seed(5));
  const std::uint64_t seed = oracle_seed(5);
  double worst = 0.0, vmax = 0.0;
  for (std::int64_t k = 0; k < T; ++k) {
    s = dsgpa_pb_step(s, net, *prob, hp, seed);
    worst = std::max(worst, s.v.colwise().sum().cwiseAbs().maxCoeff());
    vmax = std::max(vmax, s.v.cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-8, fmt::format("max_k ||sum_i v_i||_inf = {:.3e} (max |v| = {:.3g})", worst, vmax)};
}

Outcome deterministic_lyapunov_descent() {
  auto prob = quadratic_problem(4, 5, 10.0, 1.0, 0.0, 1);
  const double fstar = *prob->optimum_hint().f_star;
  bool ok = true;
  std::string detail;
  const std::vector<std::pair<std::string, Network>> graphs{{"K4", complete_graph(4)}, {"P4", path_graph(4)}};
  for (const auto& [gname, net] : graphs) {
    for (double gamma : {1.0, 0.7}) {
      const auto [k1, k2] = pick_kappas(net, 0.5);
      HyperParams hp = theorem1_schedule(net, 5000, k1, k2);
      hp.gamma = Gamma(gamma);
      RunOptions opt;
      opt.iterations = 5000;
      opt.seed = 3;
      opt.lyapunov_fstar = fstar;
      const RunResult r = run(Algorithm::dsgpa_f_pb, net, *prob, hp, opt);
      long increases = 0;
      double min_w = INFINITY, worst = 0.0;
      for (std::size_t k = 0; k < r.trace.size(); ++k) {
        const double w = r.trace[k].lyapunov->total;
        min_w = std::min(min_w, w);
        if (k == 0) continue;
        const double prev = r.trace[k - 1].lyapunov->total;
        const double excess = (w - prev) / (1.0 + std::abs(prev));
        worst = std::max(worst, excess);
        if (w > prev + 1e-9 * (1.0 + std::abs(prev))) ++increases;
      }
      const bool here = !r.diverged && increases == 0 && min_w >= 0.0;
      ok = ok && here;
      detail += fmt::format("{} g={}: W {:.3g}->{:.3g}, min {:.3g}, increases {}, worst rel step {:.1e}; ", gname,
                            gamma, r.trace.front().lyapunov->total, r.trace.back().lyapunov->total, min_w, increases,
                            worst);
    }
  }
  return {ok, detail};
}

Outcome consensus_rate() {
  const Network net = complete_graph(10);
  auto prob = quadratic_problem(10, 5, 10.0, 1.0, 1.0, 7);
  const auto [k1, k2] = pick_kappas(net, 0.5);
  bool ok = true;
  std::string detail;
  for (double gamma : {1.0, 0.7}) {
    std::vector<std::pair<double, double>> points;
    for (std::int64_t T : {1000, 4000, 16000}) {
      HyperParams hp = theorem1_schedule(net, T, k1, k2);
      hp.gamma = Gamma(gamma);
      double mean = 0.0;
      for (std::uint64_t seed = 0; seed < 8; ++seed) {
        RunOptions opt;
        opt.iterations = T;
        opt.seed = seed;
        opt.trace_every = T;
        opt.time_averages = true;
        mean += run(Algorithm::dsgpa_f_pb, net, *prob, hp, opt).averages.consensus_err / 8.0;
      }
      points.emplace_back(double(T), mean);
    }
    const RateFit fit = rate_fit(points, RateModel::inv_T);
    ok = ok && fit.exponent <= -0.6 && fit.r2 >= 0.9;
    detail += fmt::format("g={}: avg consensus {:.3g}/{:.3g}/{:.3g}, exponent {:.3f}, r2 {:.4f}; ", gamma,
                          points[0].second, points[1].second, points[2].second, fit.exponent, fit.r2);
  }
  return {ok, detail};
}

Outcome linear_speedup_trend() {
  bool ok = true;
  std::string detail;
  for (double gamma : {1.0, 0.7}) {
    std::vector<double> avg;
    for (Index n : {4, 8, 16}) {
      const Network net = complete_graph(n);
      auto prob = quadratic_problem(n, 5, 10.0, 0.0, 1.0, 7);
      const auto [k1, k2] = pick_kappas(net, 0.5);
      HyperParams hp = theorem1_schedule(net, 10000, k1, k2);
      hp.gamma = Gamma(gamma);
      double mean = 0.0;
      for (std::uint64_t seed = 0; seed < 16; ++seed) {
        RunOptions opt;
        opt.iterations = 10000;
        opt.seed = seed;
        opt.trace_every = 10000;
        opt.time_averages = true;
        mean += run(Algorithm::dsgpa_f_pb, net, *prob, hp, opt).averages.grad_norm_2 / 16.0;
      }
      avg.push_back(mean);
    }
    const bool here = avg[1] < avg[0] && avg[2] < avg[1] && avg[2] <= 0.7 * avg[0];
    ok = ok && here;
    detail += fmt::format("g={}: n=4/8/16 -> {:.4g}/{:.4g}/{:.4g} (ratio {:.3f}); ", gamma, avg[0], avg[1], avg[2],
                          avg[2] / avg[0]);
  }
  return {ok, detail};
}

Outcome gamma_one_reduction() {
  struct Case {
    std::string name;
    Network net;
    ProblemPtr prob;
    HyperParams hp;
  };
  std::vector<Case> cases;
  {
    HyperParams hp;
    hp.eta = 0.02;
    hp.alpha = 2.0;
    hp.beta = 1.0;
    cases.push_back({"quadratic/fixed", erdos_renyi(10, 0.4, 1), quadratic_problem(10, 5, 10.0, 1.0, 1.0, 2), hp});
  }
  {
    const Network net = erdos_renyi(8, 0.5, 3);
    const auto [k1, k2] = pick_kappas(net, 0.5);
    cases.push_back({"nonconvex/theorem1", net, nonconvex_problem(8, 6, 0.5, 4), theorem1_schedule(net, 2000, k1, k2)});
  }
  {
    SigmoidNetOptions opt;
    opt.hidden = 8;
    opt.classes = 3;
    opt.sigma = 0.1;
    HyperParams hp;
    hp.eta = 0.08;
    hp.alpha = 4.0;
    hp.beta = 3.0;
    hp.mode = ScheduleMode::time_varying;
    cases.push_back({"sigmoid/time_varying", erdos_renyi(5, 0.6, 5),
                     std::make_shared<TwoLayerSigmoidProblem>(gaussian_blobs(100, 4, 3, 0.5, 6), 5, opt), hp});
  }
  bool ok = true;
  std::string detail;
  std::uint64_t seed = 100;
  for (auto& c : cases) {
    RunOptions opt;
    opt.iterations = 2000;
    opt.seed = seed++;
    opt.trace_every = 10;
    HyperParams pb = c.hp;
    pb.gamma = Gamma(1.0);
    const std::string a = trace_bytes(run(Algorithm::dsgpa_f_pb, c.net, *c.prob, pb, opt).trace);
    const std::string b = trace_bytes(run(Algorithm::dsgpa_f, c.net, *c.prob, c.hp, opt).trace);
    ok = ok && a == b;
    detail += fmt::format("{}: {} ({} bytes); ", c.name, a == b ? "identical" : "DIFFERENT", a.size());
  }
  return {ok, detail};
}

// Iteration at which f(xbar) - f* first drops to 1e-2, or -1.
struct HitTimes {
  std::vector<std::int64_t> full, pb;
};

HitTimes acceleration_hits() {
  const Network net = erdos_renyi(10, 0.4, 1);
  auto prob = quadratic_problem(10, 5, 100.0, 0.1, 0.1, 7);
  const double fstar = *prob->optimum_hint().f_star;
  HitTimes h;
  for (double gamma : {1.0, 0.7}) {
    HyperParams hp;
    hp.eta = 0.01;
    hp.alpha = 2.0;
    hp.beta = 1.0;
    hp.gamma = Gamma(gamma);
    for (std::uint64_t seed = 0; seed < 16; ++seed) {
      RunOptions opt;
      opt.iterations = 20000;
      opt.seed = seed;
      const RunResult r = run(Algorithm::dsgpa_f_pb, net, *prob, hp, opt);
      std::int64_t hit = -1;
      for (const auto& rec : r.trace)
        if (rec.fbar - fstar <= 1e-2) {
          hit = rec.k;
          break;
        }
      (gamma == 1.0 ? h.full : h.pb).push_back(hit);
    }
  }
  return h;
}

const std::string kReference = std::string(DSGPA_TEST_DATA) + "/powerball_acceleration_reference.csv";

Outcome powerball_acceleration() {
  const HitTimes h = acceleration_hits();
  double mean_full = 0.0, mean_pb = 0.0;
  bool all_hit = true;
  for (std::size_t s = 0; s < 16; ++s) {
    all_hit = all_hit && h.full[s] >= 0 && h.pb[s] >= 0;
    mean_full += double(h.full[s]) / 16.0;
    mean_pb += double(h.pb[s]) / 16.0;
  }
  // Compare against the pinned reference trajectory.
  std::ifstream in(kReference);
  std::string line;
  std::getline(in, line);
  int rows = 0, drift = 0;
  while (std::getline(in, line)) {
    std::int64_t seed = 0, full = 0, pb = 0;
    if (std::sscanf(line.c_str(), "%ld,%ld,%ld", &seed, &full, &pb) != 3 || seed < 0 || seed >= 16) continue;
    ++rows;
    auto close = [](std::int64_t a, std::int64_t b) { return std::abs(a - b) <= std::max<std::int64_t>(2, b / 100); };
    if (!close(h.full[std::size_t(seed)], full) || !close(h.pb[std::size_t(seed)], pb)) ++drift;
  }
  const bool pinned = rows == 16 && drift == 0;
  return {all_hit && mean_pb <= mean_full && pinned,
          fmt::format("mean iterations to f-f*<=1e-2: gamma=0.7 {:.1f}, gamma=1 {:.1f}; reference rows {}, drifted {}",
                      mean_pb, mean_full, rows, drift)};
}

Outcome gradient_correctness() {
  struct Named {
    std::string name;
    ProblemPtr prob;
    double scale;
  };
  SigmoidNetOptions opt;  // hidden 50, classes 10
  const std::vector<Named> problems{
      {"quadratic", quadratic_problem(6, 8, 50.0, 1.0, 0.0, 1), 1.0},
      {"nonconvex", nonconvex_problem(6, 8, 0.0, 2), 2.0},
      {"two_layer_sigmoid", std::make_shared<TwoLayerSigmoidProblem>(gaussian_blobs(120, 8, 10, 0.5, 3), 4, opt), 0.3},
  };
  bool ok = true;
  std::string detail;
  SplitMix64 rng(77);
  std::normal_distribution<double> normal;
  for (const auto& [name, prob, scale] : problems) {
    double worst = 0.0;
    for (int pt = 0; pt < 20; ++pt) {
      Vector x(prob->dim());
      for (Index l = 0; l < x.size(); ++l) x(l) = scale * normal(rng);
      const Index i = Index(rng() % std::uint64_t(prob->agents()));
      const double h = 1e-5 * (1.0 + x.norm());
      Vector fd(x.size());
      Vector xp = x, xm = x;
      for (Index l = 0; l < x.size(); ++l) {
        xp(l) += h;
        xm(l) -= h;
        fd(l) = (prob->local_value(i, xp) - prob->local_value(i, xm)) / (2.0 * h);
        xp(l) = xm(l) = x(l);
      }
      worst = std::max(worst, (prob->local_grad(i, x) - fd).norm() / std::max(1.0, fd.norm()));
    }
    ok = ok && worst <= 1e-5;
    detail += fmt::format("{} (p={}): worst rel err {:.2e}; ", name, prob->dim(), worst);
  }
  return {ok, detail};
}

Outcome schedule_validation() {
  const std::vector<Edge> e{{0, 1, 1.0}};
  const Network net = build_network(e, 2);
  bool rejected = false, accepted = false;
  try {
    theorem1_schedule(net, 100, 2.0, 0.03);
  } catch (const ScheduleError&) {
    rejected = true;
  }
  try {
    theorem1_schedule(net, 100, 2.0, 0.02);
    accepted = true;
  } catch (const ScheduleError&) {
  }
  const double bound = theorem1_bounds(net, 2.0).kappa2_max;
  return {rejected && accepted && std::abs(bound - 1.0 / 39.0) < 1e-15,
          fmt::format("kappa2 bound {:.6f}; 0.03 {}; 0.02 {}", bound, rejected ? "rejected" : "ACCEPTED",
                      accepted ? "accepted" : "REJECTED")};
}

std::map<std::string, std::string> directory_bytes(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out[entry.path().filename().string()] = ss.str();
  }
  return out;
}

Outcome cli_reproducibility() {
  const fs::path root = fs::temp_directory_path() / "dsgpa_acceptance_repro";
  fs::remove_all(root);
  fs::create_directories(root);
  std::ofstream(root / "experiment.yaml") << R"(format_version: 1
graph: {type: erdos_renyi, n: 10, prob: 0.4, seed: 7}
problem: {name: nonconvex, p: 10, sigma: 0.5, seed: 3}
T: 3000
trace_every: 25
seeds: [1, 2, 3]
master_seed: 2024
lyapunov: true
algorithms:
  - {name: dsgpa_f_pb, eta: 0.02, alpha: 2, beta: 1, gamma: 0.7}
  - {name: dsgpa_f_pb, label: pb_theorem1, schedule: theorem1, kappa1: 5, kappa2: 0.0001, gamma: 0.7}
  - {name: dsgpa_t, eta: 0.02, alpha: 2, beta: 1}
  - {name: d_sgd, eta: 0.05}
  - {name: d_sgt, eta: 0.05}
  - {name: dm_sgd, eta: 0.01}
  - {name: c_sgd, eta: 0.05}
)";
  auto invoke = [&](const std::string& out, int jobs) {
    const std::string cmd = fmt::format("{} run {} --out {} --jobs {} >/dev/null 2>&1", DSGPA_CLI,
                                        (root / "experiment.yaml").string(), (root / out).string(), jobs);
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  const int rc1 = invoke("first", 1), rc2 = invoke("second", 2);
  if (rc1 != 0 || rc2 != 0) return {false, fmt::format("run exit codes {} and {}", rc1, rc2)};
  const auto a = directory_bytes(root / "first");
  const auto b = directory_bytes(root / "second");
  int traces = 0, mismatched = 0;
  for (const auto& [name, bytes] : a) {
    if (name.rfind("trace_", 0) == 0) ++traces;
    const auto it = b.find(name);
    if (it == b.end() || it->second != bytes) ++mismatched;
  }
  const bool ok = traces == 21 && a.size() == b.size() && mismatched == 0;
  return {ok, fmt::format("{} files ({} traces), {} differ", a.size(), traces, mismatched)};
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {1, "powerball energy inequality (10^5 random draws)", 10, powerball_energy_inequality},
      {2, "dual sum conservation", 30, dual_sum_conservation},
      {3, "deterministic Lyapunov descent", 20, deterministic_lyapunov_descent},
      {4, "consensus rate fit", 300, consensus_rate},
      {5, "linear speedup trend", 600, linear_speedup_trend},
      {6, "gamma = 1 reduction", 10, gamma_one_reduction},
      {7, "powerball acceleration ordering", 180, powerball_acceleration},
      {8, "gradient correctness", 30, gradient_correctness},
      {9, "schedule validation", 1, schedule_validation},
      {10, "CLI reproducibility", 30, cli_reproducibility},
  };
  return all;
}

int write_reference(const std::string& path) {
  const HitTimes h = acceleration_hits();
  std::ofstream out(path);
  out << "seed,hit_gamma_1,hit_gamma_0.7\n";
  for (std::size_t s = 0; s < 16; ++s) out << s << ',' << h.full[s] << ',' << h.pb[s] << '\n';
  std::cout << "wrote " << path << '\n';
  return out ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int a = 1; a < argc; ++a) {
    const std::string arg = argv[a];
    if (arg == "--write-reference") return write_reference(a + 1 < argc ? argv[a + 1] : kReference);
    selected.push_back(std::stoi(arg));
  }

  int failures = 0;
  for (const Criterion& c : criteria()) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.body();
    } catch (const std::exception& e) {
      out = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = out.pass && in_time;
    failures += pass ? 0 : 1;
    std::cout << fmt::format("[{}] #{} {} ({:.2f}s / {:.0f}s budget{}): {}\n", pass ? "PASS" : "FAIL", c.id, c.name,
                             secs, c.budget_s, in_time ? "" : ", OVER BUDGET", out.detail)
              << std::flush;
  }
  return failures == 0 ? 0 : 1;
}
