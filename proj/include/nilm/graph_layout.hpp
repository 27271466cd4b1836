#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace nilm {

struct GraphEdge {
  int u = 0;
  int v = 0;
  double w = 1.0;
};

// Undirected weighted graph. Edges are stored once with u < v; weights are
// non-negative and self-loops are forbidden.
struct SimilarityGraph {
  int num_vertices = 0;
  std::vector<std::string> ids;  // optional, size 0 or num_vertices
  std::vector<int> labels;       // optional tag per vertex, size 0 or n
  std::vector<GraphEdge> edges;
};

void validate_graph(const SimilarityGraph& g);

// Spring model: repulsion k/d^2 between every vertex pair, attraction k*d
// along each edge (scaled by edge weight). Equilibrium of an isolated
// connected pair sits at distance 1 in units of k.
double repulsion_force(double k, double d);   // k / d^2
double attraction_force(double k, double d);  // -k * d (signed: pulls together)

struct LayoutParams {
  double k = 1.0;         // spring constant = target edge length unit
  double tol = 1e-3;      // converged when max displacement < tol * k
  int min_size = 10;      // stop coarsening below this many vertices
  double coarsen_ratio = 0.75;  // stop when coarse/fine size exceeds this
  int max_iterations_per_level = 500;
  double theta = 1.2;     // Barnes-Hut opening threshold; 0 = exact forces
  std::uint64_t seed = 1;
  int jobs = 1;
};

// Net force on every vertex (n x 2): Barnes-Hut approximated repulsion plus
// exact per-edge attraction. theta = 0 degenerates to the exact O(n^2) sum.
// Coincident vertices are nudged apart along a deterministic index-derived
// direction before evaluation.
Eigen::MatrixXd layout_forces(const SimilarityGraph& g,
                              const Eigen::MatrixXd& coords, double k,
                              double theta, int jobs = 1);

struct CoarsenResult {
  SimilarityGraph coarse;
  std::vector<int> parent;          // fine vertex -> coarse vertex
  std::vector<double> self_weight;  // collapsed intra-pair weight per coarse vertex
};

// Heavy-edge matching: each unmatched vertex (ascending order) merges with
// its heaviest unmatched neighbour. The coarse adjacency is the congruence
// product P^T G P of the 0/1 prolongation matrix; its diagonal is reported
// separately as self_weight so the coarse graph stays loop-free.
CoarsenResult coarsen(const SimilarityGraph& g);

struct RefineResult {
  Eigen::MatrixXd coords;
  bool converged = false;
  int iterations = 0;
};

// Adaptive force-directed iterations from the given positions: displacement
// per step is min(step, |F|) along F, step length grows 1.1x after an
// energy decrease and shrinks 0.9x otherwise.
RefineResult refine_layout(const SimilarityGraph& g, Eigen::MatrixXd initial,
                           const LayoutParams& params);

struct LayoutResult {
  Eigen::MatrixXd coords;  // n x 2
  bool converged = true;   // false if any level hit its iteration cap
  int levels = 0;          // coarsening depth of the largest component
};

// Multilevel scheme: coarsen recursively while the graph keeps shrinking
// (ratio <= coarsen_ratio) and has at least min_size vertices, lay out the
// coarsest level from a seeded random start, then prolong and refine back
// up. Connected components are laid out independently and tiled side by
// side; a lone component is left untranslated and a single vertex sits at
// the origin.
LayoutResult multilevel_layout(const SimilarityGraph& g,
                               const LayoutParams& params);

// k-nearest-neighbour graph over feature rows, weight 1/(1 + distance),
// symmetrized by union. labels tag each vertex with its appliance code.
SimilarityGraph device_similarity_graph(const Eigen::MatrixXd& features,
                                        const std::vector<int>& labels,
                                        int num_neighbours = 5);

}  // namespace nilm
