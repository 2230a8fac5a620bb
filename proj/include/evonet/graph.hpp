#ifndef EVONET_GRAPH_HPP
#define EVONET_GRAPH_HPP

#include "evonet/core.hpp"
#include "evonet/states.hpp"

#include <string>
#include <vector>

namespace evonet {

/// Sequence of |V| x |V| transition matrices. Snapshot t-1 (0-based) holds the
/// transitions from segment t-1 to segment t, so T segments give T-1 snapshots.
struct EvoStateGraph {
  Index num_states = 0;
  std::vector<Matrix> snapshots;

  Index size() const { return static_cast<Index>(snapshots.size()); }
};

/// Outer product of two recognition rows: m(v, v') = prev(v) * next(v').
template <typename A, typename B>
Matrix transition_snapshot(const Eigen::MatrixBase<A>& prev, const Eigen::MatrixBase<B>& next) {
  if (prev.size() != next.size()) {
    throw ValidationError("transition_snapshot: weight vectors differ in length");
  }
  return prev.derived().reshaped() * next.derived().reshaped().transpose();
}

EvoStateGraph build_graph_sequence(const RecognitionFrame& frame);

/// [M; M^T]: rows 0..|V|-1 are M_in = M, rows |V|..2|V|-1 are M_out = M^T.
Matrix in_out_adjacency(const Matrix& snapshot);

/// Weighted in-degree: column sums.
template <typename Derived>
RowVector in_degree(const Eigen::MatrixBase<Derived>& snapshot) {
  return snapshot.colwise().sum();
}

/// Power iteration on the random walk that leaves each node along its
/// out-edges in proportion to weight; zero out-mass nodes jump uniformly.
Vector pagerank(const Matrix& snapshot, Scalar damping = 0.85, Scalar tol = 1e-10, int max_iter = 10000);

struct Centrality {
  Vector betweenness;
  Vector closeness;
};

/// Brandes betweenness and closeness on the graph keeping edges with weight
/// >= epsilon, each with length 1/weight. Self-loops never lie on shortest
/// paths and are ignored. Closeness of v is (r - 1) / sum of distances to the
/// r - 1 nodes it reaches, 0 when it reaches none.
Centrality centrality(const Matrix& snapshot, Scalar epsilon = 1e-3);

struct GraphStats {
  Vector betweenness;
  Vector closeness;
  Vector pagerank;
  Vector in_degree;
};

std::vector<GraphStats> graph_stats(const EvoStateGraph& graph, Scalar epsilon = 1e-3,
                                    Scalar damping = 0.85, Scalar tol = 1e-10);

/// Elementwise mean of snapshots [begin, end).
Matrix aggregate_graph(const EvoStateGraph& graph, Index begin, Index end);

enum class ExportFormat { kDot, kJson };
ExportFormat parse_export_format(const std::string& name);

/// DOT: one digraph per snapshot, nodes s0..s{|V|-1}, edges with weight >= threshold (never zero-weight ones).
/// JSON: {version, num_states, snapshots: [{t, edges: [{from, to, w}]}]}, 17 significant digits.
std::string export_graph(const EvoStateGraph& graph, ExportFormat format, Scalar threshold);
std::string export_snapshot(const Matrix& snapshot, ExportFormat format, Scalar threshold);

/// Inverse of the JSON export; edges absent from the document are zero.
EvoStateGraph import_graph_json(const std::string& text);

}  // namespace evonet

#endif  // EVONET_GRAPH_HPP
