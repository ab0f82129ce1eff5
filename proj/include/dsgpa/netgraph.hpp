#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dsgpa/types.hpp"

namespace dsgpa {

class GraphError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Edge {
  Index i = 0;
  Index j = 0;
  double w = 1.0;
};

// Fixed undirected weighted communication graph. Immutable once built; the
// Laplacian L = Deg - A and its symmetric eigendecomposition are computed at
// construction.
class Network {
 public:
  // Rejects self-loops, duplicate undirected edges, out-of-range endpoints
  // and nonpositive weights.
  static Network from_edges(Index n, std::span<const Edge> edges);

  Index size() const { return n_; }
  const Eigen::MatrixXd& weights() const { return weights_; }
  const Eigen::MatrixXd& laplacian() const { return laplacian_; }
  const std::vector<std::vector<Index>>& neighbors() const { return neighbors_; }
  const std::vector<Edge>& edges() const { return edges_; }

  // Ascending eigenvalues of L and the matching orthonormal eigenvectors
  // (columns).
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }

  // Spectral radius of L.
  double rho() const { return rho_; }
  // Second-smallest eigenvalue of L with eigenvalues below 1e-10 * rho()
  // snapped to zero; equals the smallest positive eigenvalue iff connected.
  double rho2() const { return rho2_; }
  // rho(L^2) = rho(L)^2 since L is symmetric PSD.
  double rho_sq() const { return rho_ * rho_; }

  // Breadth-first reachability from agent 0.
  bool connected() const;
  // Spectral connectivity test (rho2 > 0, or a single agent).
  bool spectrally_connected() const { return n_ == 1 || rho2_ > 0.0; }

  // Row i of the result is sum_j L_ij X_j. Rows are visited in a fixed order
  // so the result is bitwise reproducible.
  Matrix laplacian_apply(const Matrix& x) const;

 private:
  Network() = default;

  Index n_ = 0;
  Eigen::MatrixXd weights_;
  Eigen::MatrixXd laplacian_;
  Eigen::VectorXd degree_;
  std::vector<std::vector<Index>> neighbors_;
  std::vector<Edge> edges_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  double rho_ = 0.0;
  double rho2_ = 0.0;
};

Network build_network(std::span<const Edge> edges, Index n);

inline constexpr int kErdosRenyiMaxAttempts = 1000;

// G(n, prob) with unit weights. Disconnected samples are redrawn with seeds
// derived from (seed, attempt) until one is connected or the attempt budget
// runs out.
Network erdos_renyi(Index n, double prob, std::uint64_t seed, int max_attempts = kErdosRenyiMaxAttempts);

Network complete_graph(Index n);
Network path_graph(Index n);

bool is_connected(const Network& net);
Matrix laplacian_apply(const Network& net, const Matrix& x);

// Plain-text graph file: "n m" followed by m lines "i j w".
void write_graph(std::ostream& os, const Network& net);
Network read_graph(std::istream& is);
Network load_graph(const std::string& path);
void save_graph(const std::string& path, const Network& net);

}  // namespace dsgpa
