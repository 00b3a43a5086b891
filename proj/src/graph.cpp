#include "qdpd/graph.hpp"

#include <algorithm>
#include <string>

#include "qdpd/errors.hpp"

namespace qdpd {

Spectrum compute_spectrum(const Eigen::MatrixXd& laplacian,
                          double connectivity_tol) {
  if (laplacian.rows() == 0 || laplacian.rows() != laplacian.cols()) {
    throw ShapeError("laplacian must be a non-empty square matrix");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      laplacian, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw TopologyError("laplacian eigensolve failed");
  }
  Spectrum s;
  const Eigen::VectorXd& ev = solver.eigenvalues();  // ascending
  s.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  if (s.eigenvalues.size() > 1 && s.eigenvalues[1] < connectivity_tol) {
    throw TopologyError("graph is disconnected (second Laplacian eigenvalue " +
                        std::to_string(s.eigenvalues[1]) + ")");
  }
  return s;
}

NetworkGraph::NetworkGraph(int node_count, std::vector<Edge> edges)
    : node_count_(node_count) {
  if (node_count < 1) {
    throw TopologyError("graph needs at least one node");
  }
  for (auto& e : edges) {
    if (e.u == e.v) {
      throw TopologyError("self loop at node " + std::to_string(e.u));
    }
    if (e.u < 0 || e.v < 0 || e.u >= node_count || e.v >= node_count) {
      throw TopologyError("edge endpoint out of range");
    }
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw TopologyError("duplicate edge");
  }
  edges_ = std::move(edges);

  neighbors_.assign(node_count, {});
  adjacency_ = Eigen::MatrixXd::Zero(node_count, node_count);
  for (const auto& e : edges_) {
    neighbors_[e.u].push_back(e.v);
    neighbors_[e.v].push_back(e.u);
    adjacency_(e.u, e.v) = 1.0;
    adjacency_(e.v, e.u) = 1.0;
  }
  for (auto& nb : neighbors_) std::sort(nb.begin(), nb.end());

  laplacian_ = -adjacency_;
  for (int i = 0; i < node_count; ++i) {
    laplacian_(i, i) = static_cast<double>(neighbors_[i].size());
  }
  spectrum_ = compute_spectrum(laplacian_);
}

NetworkGraph NetworkGraph::ring(int n) {
  if (n < 3) {
    throw TopologyError("ring needs at least 3 nodes, got " +
                        std::to_string(n));
  }
  std::vector<Edge> edges;
  edges.reserve(n);
  for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n});
  return NetworkGraph(n, std::move(edges));
}

NetworkGraph NetworkGraph::complete(int n) {
  if (n < 1) throw TopologyError("complete graph needs at least 1 node");
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.push_back({i, j});
  return NetworkGraph(n, std::move(edges));
}

Eigen::VectorXd NetworkGraph::apply_laplacian(
    const Eigen::Ref<const Eigen::VectorXd>& v, int block_dim) const {
  if (block_dim < 1 || v.size() != static_cast<Eigen::Index>(node_count_) * block_dim) {
    throw ShapeError("apply_laplacian: expected " +
                     std::to_string(node_count_) + " blocks of " +
                     std::to_string(block_dim) + ", got " +
                     std::to_string(v.size()) + " entries");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
  for (int i = 0; i < node_count_; ++i) {
    auto vi = v.segment(i * block_dim, block_dim);
    auto oi = out.segment(i * block_dim, block_dim);
    for (int j : neighbors_[i]) oi += vi - v.segment(j * block_dim, block_dim);
  }
  return out;
}

}  // namespace qdpd
