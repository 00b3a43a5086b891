#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qdpd {

/// Unordered edge, stored with u < v (0-based node ids).
struct Edge {
  int u;
  int v;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Ascending Laplacian eigenvalues 0 = s_1 <= ... <= s_N.
struct Spectrum {
  std::vector<double> eigenvalues;

  double smallest() const { return eigenvalues.front(); }
  /// Algebraic connectivity s_2; zero for a single-node graph.
  double second() const {
    return eigenvalues.size() > 1 ? eigenvalues[1] : 0.0;
  }
  double largest() const { return eigenvalues.back(); }
};

/// Full ascending spectrum of a symmetric Laplacian. Throws TopologyError when
/// the second eigenvalue is below `connectivity_tol` (graph is disconnected).
Spectrum compute_spectrum(const Eigen::MatrixXd& laplacian,
                          double connectivity_tol = 1e-9);

// Immutable undirected, unweighted, connected communication graph. The
// Laplacian spectrum is computed once at construction.
class NetworkGraph {
 public:
  NetworkGraph(int node_count, std::vector<Edge> edges);

  /// Cycle on n >= 3 nodes.
  static NetworkGraph ring(int n);
  static NetworkGraph complete(int n);

  int node_count() const noexcept { return node_count_; }
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::span<const int> neighbors(int i) const { return neighbors_.at(i); }
  int degree(int i) const { return static_cast<int>(neighbors_.at(i).size()); }

  const Eigen::MatrixXd& adjacency() const noexcept { return adjacency_; }
  const Eigen::MatrixXd& laplacian() const noexcept { return laplacian_; }
  const Spectrum& spectrum() const noexcept { return spectrum_; }
  double sigma2() const noexcept { return spectrum_.second(); }
  double sigmaN() const noexcept { return spectrum_.largest(); }

  /// (L_G kron I_n) v evaluated blockwise as sum_j (v_i - v_j).
  /// `v` holds node_count() blocks of `block_dim` entries each.
  Eigen::VectorXd apply_laplacian(const Eigen::Ref<const Eigen::VectorXd>& v,
                                  int block_dim) const;

 private:
  int node_count_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> neighbors_;
  Eigen::MatrixXd adjacency_;
  Eigen::MatrixXd laplacian_;
  Spectrum spectrum_;
};

}  // namespace qdpd
