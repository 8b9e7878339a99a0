#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hkg/core.hpp"

namespace hkg::topo {

// Undirected simple graph: relation labels and edge direction are dropped,
// self-loops and parallel edges removed.
class SimpleGraph {
 public:
  static SimpleGraph from_triples(const std::vector<Triple>& triples);

  int num_nodes() const { return static_cast<int>(adjacency_.size()); }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int v) const { return adjacency_.at(v); }
  int degree(int v) const { return static_cast<int>(adjacency_.at(v).size()); }
  bool has_edge(int u, int v) const;

  std::size_t self_loops_dropped = 0;
  std::size_t parallel_edges_dropped = 0;

 private:
  std::vector<std::vector<int>> adjacency_;  // sorted neighbor lists
  std::vector<std::pair<int, int>> edges_;   // (min,max), sorted
};

struct EdgeCurvature {
  int s = 0, o = 0;
  int d_s = 0, d_o = 0;
  int n_triangles = 0;
  int n_sq_s = 0, n_sq_o = 0;
  int gamma_max = 0;
  double ric = 0.0;
  bool degenerate = false;  // min degree 1, ric fixed to 0 by convention
};

// |N(s) ∩ N(o)| for an existing edge.
int triangles(const SimpleGraph& g, int s, int o);

struct SquareCounts {
  int n_sq_s = 0;
  int n_sq_o = 0;
  int gamma_max = 0;
};

// Diagonal-free 4-cycle counts based at an existing edge (s,o):
// n_sq_s counts k in N(s) \ (N(o) ∪ {o}) with some w in N(o) \ (N(s) ∪ {s}),
// k ~ w; n_sq_o symmetrically; gamma_max is the largest number of such
// 4-cycles through any single square node.
SquareCounts squares(const SimpleGraph& g, int s, int o);

EdgeCurvature balanced_forman(const SimpleGraph& g, int s, int o);

struct CurvatureReport {
  std::vector<EdgeCurvature> per_edge;      // canonical edge order
  std::vector<double> sorted_curvatures;    // ascending
  double oversquashing_proportion = 0.0;    // fraction with ric <= 0; NaN if no edges
  std::size_t n_nonpositive = 0;
  std::size_t n_strictly_negative = 0;
  std::size_t n_degenerate = 0;
};

CurvatureReport curvature_report(const SimpleGraph& g, int threads = 1);

// CSV with one row per edge (s,o,d_s,d_o,triangles,sq_s,sq_o,gamma_max,ric)
// and a footer with the over-squashing proportion. Byte-identical for any
// thread count.
std::string report_to_csv(const CurvatureReport& report);
// (rank, ric) pairs, ascending by curvature, for distribution plots.
std::string distribution_to_csv(const CurvatureReport& report);

}  // namespace hkg::topo
