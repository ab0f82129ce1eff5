#include "dsgpa/netgraph.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <utility>

#include <Eigen/Eigenvalues>
#include <fmt/core.h>

#include "dsgpa/random.hpp"

namespace dsgpa {

namespace {

constexpr double kZeroEigenvalueRatio = 1e-10;

}  // namespace

Network Network::from_edges(Index n, std::span<const Edge> edges) {
  if (n <= 0) throw GraphError(fmt::format("network needs at least one agent, got n={}", n));

  Network net;
  net.n_ = n;
  net.weights_ = Eigen::MatrixXd::Zero(n, n);
  net.neighbors_.assign(static_cast<std::size_t>(n), {});

  std::set<std::pair<Index, Index>> seen;
  for (const Edge& e : edges) {
    if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n)
      throw GraphError(fmt::format("edge ({}, {}) out of range for n={}", e.i, e.j, n));
    if (e.i == e.j) throw GraphError(fmt::format("self-loop at agent {}", e.i));
    if (!(e.w > 0.0) || !std::isfinite(e.w))
      throw GraphError(fmt::format("edge ({}, {}) has nonpositive weight {}", e.i, e.j, e.w));
    auto key = std::minmax(e.i, e.j);
    if (!seen.insert(key).second) throw GraphError(fmt::format("duplicate edge ({}, {})", key.first, key.second));
    net.weights_(e.i, e.j) = e.w;
    net.weights_(e.j, e.i) = e.w;
    net.edges_.push_back(e);
  }

  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (net.weights_(i, j) > 0.0) net.neighbors_[static_cast<std::size_t>(i)].push_back(j);

  net.degree_ = net.weights_.rowwise().sum();
  net.laplacian_ = -net.weights_;
  net.laplacian_.diagonal() = net.degree_;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(net.laplacian_);
  if (solver.info() != Eigen::Success) throw GraphError("symmetric eigensolver failed on the Laplacian");
  net.eigenvalues_ = solver.eigenvalues();
  net.eigenvectors_ = solver.eigenvectors();

  net.rho_ = std::max(0.0, net.eigenvalues_(n - 1));
  const double zero_tol = kZeroEigenvalueRatio * net.rho_;
  for (Index l = 0; l < n; ++l)
    if (std::abs(net.eigenvalues_(l)) <= zero_tol) net.eigenvalues_(l) = 0.0;
  net.rho2_ = n >= 2 ? std::max(0.0, net.eigenvalues_(1)) : 0.0;
  return net;
}

bool Network::connected() const {
  std::vector<char> seen(static_cast<std::size_t>(n_), 0);
  std::queue<Index> frontier;
  frontier.push(0);
  seen[0] = 1;
  Index reached = 1;
  while (!frontier.empty()) {
    Index u = frontier.front();
    frontier.pop();
    for (Index v : neighbors_[static_cast<std::size_t>(u)]) {
      if (seen[static_cast<std::size_t>(v)]) continue;
      seen[static_cast<std::size_t>(v)] = 1;
      ++reached;
      frontier.push(v);
    }
  }
  return reached == n_;
}

Matrix Network::laplacian_apply(const Matrix& x) const {
  if (x.rows() != n_)
    throw std::invalid_argument(fmt::format("laplacian_apply: expected {} rows, got {}", n_, x.rows()));
  Matrix out(x.rows(), x.cols());
  for (Index i = 0; i < n_; ++i) {
    auto row = out.row(i);
    row = degree_(i) * x.row(i);
    for (Index j : neighbors_[static_cast<std::size_t>(i)]) row -= weights_(i, j) * x.row(j);
  }
  return out;
}

Network build_network(std::span<const Edge> edges, Index n) { return Network::from_edges(n, edges); }

Network erdos_renyi(Index n, double prob, std::uint64_t seed, int max_attempts) {
  if (n < 2) throw GraphError(fmt::format("erdos_renyi needs n >= 2, got {}", n));
  if (!(prob > 0.0 && prob <= 1.0)) throw GraphError(fmt::format("erdos_renyi probability must lie in (0, 1], got {}", prob));

  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    SplitMix64 rng(derive_seed(seed, {static_cast<std::uint64_t>(attempt)}));
    std::bernoulli_distribution coin(prob);
    std::vector<Edge> edges;
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j)
        if (coin(rng)) edges.push_back({i, j, 1.0});
    Network net = Network::from_edges(n, edges);
    if (net.connected()) return net;
  }
  throw GraphError(fmt::format("erdos_renyi(n={}, prob={}) produced no connected sample within {} attempts", n, prob,
                               max_attempts));
}

Network complete_graph(Index n) {
  std::vector<Edge> edges;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) edges.push_back({i, j, 1.0});
  return Network::from_edges(n, edges);
}

Network path_graph(Index n) {
  std::vector<Edge> edges;
  for (Index i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
  return Network::from_edges(n, edges);
}

bool is_connected(const Network& net) { return net.connected(); }

Matrix laplacian_apply(const Network& net, const Matrix& x) { return net.laplacian_apply(x); }

void write_graph(std::ostream& os, const Network& net) {
  os << net.size() << ' ' << net.edges().size() << '\n';
  char buf[64];
  for (const Edge& e : net.edges()) {
    std::snprintf(buf, sizeof buf, "%.17g", e.w);
    os << e.i << ' ' << e.j << ' ' << buf << '\n';
  }
}

Network read_graph(std::istream& is) {
  std::string line;
  int lineno = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(is, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };

  if (!next_line()) throw GraphError("graph file is empty");
  long long n = 0, m = 0;
  {
    std::istringstream hdr(line);
    if (!(hdr >> n >> m) || n <= 0 || m < 0) throw GraphError(fmt::format("line {}: expected header 'n m'", lineno));
  }
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (long long e = 0; e < m; ++e) {
    if (!next_line()) throw GraphError(fmt::format("graph file ends after {} of {} edges", e, m));
    std::istringstream row(line);
    long long i = 0, j = 0;
    std::string wtext;
    if (!(row >> i >> j >> wtext)) throw GraphError(fmt::format("line {}: expected 'i j w'", lineno));
    char* end = nullptr;
    double w = std::strtod(wtext.c_str(), &end);
    if (end == wtext.c_str() || *end != '\0') throw GraphError(fmt::format("line {}: bad weight '{}'", lineno, wtext));
    edges.push_back({static_cast<Index>(i), static_cast<Index>(j), w});
  }
  return Network::from_edges(static_cast<Index>(n), edges);
}

Network load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open graph file '{}'", path));
  return read_graph(in);
}

void save_graph(const std::string& path, const Network& net) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot write graph file '{}'", path));
  write_graph(out, net);
}

}  // namespace dsgpa
