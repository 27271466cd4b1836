#include "nilm/graph_layout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>

#include "nilm/parallel.hpp"
#include "nilm/rng.hpp"

namespace nilm {

namespace {

constexpr std::uint64_t kTagLayout = 0x1a9a;
constexpr int kMaxQuadDepth = 40;
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kCoincidentScale = 1e-6;  // epsilon separation, in k units

// Deterministic antisymmetric unit vector for separating coincident pairs:
// dir(u, v) == -dir(v, u).
Eigen::Vector2d jitter_direction(int u, int v) {
  const std::uint64_t a = static_cast<std::uint64_t>(std::min(u, v));
  const std::uint64_t b = static_cast<std::uint64_t>(std::max(u, v));
  const double unit = static_cast<double>(mix64((a << 32) ^ b) >> 11) *
                      0x1.0p-53;
  Eigen::Vector2d dir(std::cos(kTwoPi * unit), std::sin(kTwoPi * unit));
  return u > v ? Eigen::Vector2d(-dir) : dir;
}

struct QuadNode {
  double cx = 0, cy = 0, half = 0;
  int count = 0;
  double sx = 0, sy = 0;  // coordinate sums for the centroid
  int child[4] = {-1, -1, -1, -1};
  int single = -1;          // sole occupant while count == 1
  std::vector<int> bucket;  // occupants at the depth cap
};

class QuadTree {
 public:
  QuadTree(const Eigen::MatrixXd& pts, double eps) : pts_(pts), eps_(eps) {
    const int n = static_cast<int>(pts.rows());
    if (n == 0) return;
    double lo_x = pts.col(0).minCoeff(), hi_x = pts.col(0).maxCoeff();
    double lo_y = pts.col(1).minCoeff(), hi_y = pts.col(1).maxCoeff();
    QuadNode root;
    root.cx = (lo_x + hi_x) / 2;
    root.cy = (lo_y + hi_y) / 2;
    root.half = std::max(hi_x - lo_x, hi_y - lo_y) / 2 + 1e-9;
    nodes_.push_back(root);
    for (int i = 0; i < n; ++i) insert(0, i, 0);
  }

  // Sum of k/d^2 repulsion contributions on vertex i. theta = 0 forces full
  // descent to the leaves (exact pairwise sum).
  Eigen::Vector2d repulsion(int i, double k, double theta) const {
    Eigen::Vector2d force(0, 0);
    if (nodes_.empty()) return force;
    accumulate(0, i, k, theta, force);
    return force;
  }

  // Force between a concrete pair; coincident points are pushed apart along
  // the index-derived jitter direction at distance eps.
  Eigen::Vector2d pair_repulsion(int i, int j, double k) const {
    Eigen::Vector2d delta = pts_.row(i) - pts_.row(j);
    double d = delta.norm();
    if (d == 0.0) {
      delta = jitter_direction(i, j) * eps_;
      d = eps_;
    }
    return delta * (k / (d * d * d));
  }

 private:
  int quadrant(const QuadNode& node, int i) const {
    return (pts_(i, 0) >= node.cx ? 1 : 0) + (pts_(i, 1) >= node.cy ? 2 : 0);
  }

  int make_child(int parent, int q) {
    QuadNode child;
    const QuadNode& p = nodes_[parent];
    child.half = p.half / 2;
    child.cx = p.cx + (q & 1 ? child.half : -child.half);
    child.cy = p.cy + (q & 2 ? child.half : -child.half);
    nodes_.push_back(child);
    return static_cast<int>(nodes_.size()) - 1;
  }

  void insert(int node_index, int i, int depth) {
    {
      QuadNode& node = nodes_[node_index];
      node.count += 1;
      node.sx += pts_(i, 0);
      node.sy += pts_(i, 1);
      if (depth == kMaxQuadDepth) {
        node.bucket.push_back(i);
        return;
      }
      if (node.count == 1) {
        node.single = i;
        return;
      }
    }
    if (nodes_[node_index].single >= 0) {
      const int pending = nodes_[node_index].single;
      nodes_[node_index].single = -1;
      push_down(node_index, pending, depth);
    }
    push_down(node_index, i, depth);
  }

  void push_down(int node_index, int i, int depth) {
    const int q = quadrant(nodes_[node_index], i);
    if (nodes_[node_index].child[q] < 0) {
      const int c = make_child(node_index, q);  // may reallocate nodes_
      nodes_[node_index].child[q] = c;
    }
    insert(nodes_[node_index].child[q], i, depth + 1);
  }

  bool contains(const QuadNode& node, int i) const {
    return std::fabs(pts_(i, 0) - node.cx) <= node.half &&
           std::fabs(pts_(i, 1) - node.cy) <= node.half;
  }

  void accumulate(int node_index, int i, double k, double theta,
                  Eigen::Vector2d& force) const {
    const QuadNode& node = nodes_[node_index];
    if (node.count == 0) return;
    if (node.single >= 0) {
      if (node.single != i) force += pair_repulsion(i, node.single, k);
      return;
    }
    if (!node.bucket.empty()) {
      for (int j : node.bucket)
        if (j != i) force += pair_repulsion(i, j, k);
      return;
    }
    const Eigen::Vector2d centroid(node.sx / node.count, node.sy / node.count);
    Eigen::Vector2d delta = pts_.row(i).transpose() - centroid;
    const double d = delta.norm();
    const double width = 2 * node.half;
    if (d > 0 && width / d < theta && !contains(node, i)) {
      force += delta * (node.count * k / (d * d * d));
      return;
    }
    for (int c : node.child)
      if (c >= 0) accumulate(c, i, k, theta, force);
  }

  const Eigen::MatrixXd& pts_;
  double eps_;
  std::vector<QuadNode> nodes_;
};

std::vector<std::vector<std::pair<int, double>>> adjacency(
    const SimilarityGraph& g) {
  std::vector<std::vector<std::pair<int, double>>> adj(g.num_vertices);
  for (const GraphEdge& e : g.edges) {
    adj[e.u].push_back({e.v, e.w});
    adj[e.v].push_back({e.u, e.w});
  }
  return adj;
}

}  // namespace

void validate_graph(const SimilarityGraph& g) {
  if (g.num_vertices < 0) throw std::invalid_argument("negative vertex count");
  if (!g.ids.empty() && static_cast<int>(g.ids.size()) != g.num_vertices)
    throw std::invalid_argument("vertex id count mismatch");
  if (!g.labels.empty() && static_cast<int>(g.labels.size()) != g.num_vertices)
    throw std::invalid_argument("vertex label count mismatch");
  std::set<std::pair<int, int>> seen;
  for (const GraphEdge& e : g.edges) {
    if (e.u < 0 || e.u >= g.num_vertices || e.v < 0 || e.v >= g.num_vertices)
      throw std::invalid_argument("edge endpoint out of range");
    if (e.u == e.v) throw std::invalid_argument("self-loop edge");
    if (e.u >= e.v)
      throw std::invalid_argument("edges must be stored with u < v");
    if (!(e.w >= 0))
      throw std::invalid_argument("edge weight must be non-negative");
    if (!seen.insert({e.u, e.v}).second)
      throw std::invalid_argument("duplicate edge");
  }
}

double repulsion_force(double k, double d) {
  if (d <= 0) throw std::invalid_argument("repulsion needs d > 0");
  return k / (d * d);
}

double attraction_force(double k, double d) {
  if (d < 0) throw std::invalid_argument("attraction needs d >= 0");
  return -k * d;
}

Eigen::MatrixXd layout_forces(const SimilarityGraph& g,
                              const Eigen::MatrixXd& coords, double k,
                              double theta, int jobs) {
  if (coords.rows() != g.num_vertices || coords.cols() != 2)
    throw std::invalid_argument("coordinate matrix must be n x 2");
  Eigen::MatrixXd force = Eigen::MatrixXd::Zero(g.num_vertices, 2);
  QuadTree tree(coords, kCoincidentScale * k);
  parallel_for(jobs, g.num_vertices, [&](int i) {
    force.row(i) = tree.repulsion(i, k, theta).transpose();
  });
  for (const GraphEdge& e : g.edges) {
    // attraction -k*d*w along the unit separation collapses to -k*w*delta
    const Eigen::Vector2d delta = coords.row(e.u) - coords.row(e.v);
    force.row(e.u) -= (k * e.w) * delta.transpose();
    force.row(e.v) += (k * e.w) * delta.transpose();
  }
  return force;
}

CoarsenResult coarsen(const SimilarityGraph& g) {
  validate_graph(g);
  if (g.num_vertices < 2)
    throw std::invalid_argument("coarsening needs at least 2 vertices");
  const auto adj = adjacency(g);

  // heavy-edge matching, ascending vertex order, ties to the lower neighbour
  std::vector<int> mate(g.num_vertices, -1);
  for (int u = 0; u < g.num_vertices; ++u) {
    if (mate[u] >= 0) continue;
    int best = -1;
    double best_w = -1;
    for (const auto& [v, w] : adj[u]) {
      if (mate[v] >= 0 || v == u) continue;
      if (w > best_w || (w == best_w && v < best)) {
        best = v;
        best_w = w;
      }
    }
    if (best >= 0) {
      mate[u] = best;
      mate[best] = u;
    }
  }

  CoarsenResult out;
  out.parent.assign(g.num_vertices, -1);
  int next = 0;
  for (int u = 0; u < g.num_vertices; ++u) {
    if (out.parent[u] >= 0) continue;
    out.parent[u] = next;
    if (mate[u] >= 0) out.parent[mate[u]] = next;
    ++next;
  }
  out.coarse.num_vertices = next;
  out.self_weight.assign(next, 0.0);

  std::map<std::pair<int, int>, double> merged;
  for (const GraphEdge& e : g.edges) {
    const int a = out.parent[e.u];
    const int b = out.parent[e.v];
    if (a == b) {
      out.self_weight[a] += e.w;
      continue;
    }
    merged[{std::min(a, b), std::max(a, b)}] += e.w;
  }
  for (const auto& [key, w] : merged)
    out.coarse.edges.push_back({key.first, key.second, w});
  return out;
}

RefineResult refine_layout(const SimilarityGraph& g, Eigen::MatrixXd initial,
                           const LayoutParams& params) {
  validate_graph(g);
  if (initial.rows() != g.num_vertices || initial.cols() != 2)
    throw std::invalid_argument("initial coordinates must be n x 2");
  RefineResult out;
  out.coords = std::move(initial);
  if (g.num_vertices <= 1) {
    out.converged = true;
    return out;
  }

  // Displacements are capped at tol*k/4 before declaring convergence so the
  // final positions sit within tol of the force equilibrium rather than one
  // full step away from it.
  const double stop = 0.25 * params.tol * params.k;
  double step = params.k;
  double prev_energy = std::numeric_limits<double>::infinity();
  int progress = 0;
  for (int iter = 1; iter <= params.max_iterations_per_level; ++iter) {
    out.iterations = iter;
    const Eigen::MatrixXd force =
        layout_forces(g, out.coords, params.k, params.theta, params.jobs);
    const double energy = force.squaredNorm();
    double max_disp = 0.0;
    for (int i = 0; i < g.num_vertices; ++i) {
      const double f = force.row(i).norm();
      if (f == 0.0) continue;
      const double d = std::min(step, f);
      out.coords.row(i) += force.row(i) * (d / f);
      max_disp = std::max(max_disp, d);
    }
    if (energy < prev_energy) {
      if (++progress >= 5) {
        progress = 0;
        step *= 1.1;
      }
    } else {
      progress = 0;
      step *= 0.9;
    }
    prev_energy = energy;
    if (max_disp < stop) {
      out.converged = true;
      break;
    }
  }
  return out;
}

namespace {

SimilarityGraph induced_subgraph(const SimilarityGraph& g,
                                 const std::vector<int>& vertices,
                                 std::vector<int>& local_of) {
  SimilarityGraph sub;
  sub.num_vertices = static_cast<int>(vertices.size());
  for (size_t i = 0; i < vertices.size(); ++i)
    local_of[vertices[i]] = static_cast<int>(i);
  for (const GraphEdge& e : g.edges) {
    const int lu = local_of[e.u];
    const int lv = local_of[e.v];
    if (lu >= 0 && lv >= 0)
      sub.edges.push_back({std::min(lu, lv), std::max(lu, lv), e.w});
  }
  std::sort(sub.edges.begin(), sub.edges.end(),
            [](const GraphEdge& a, const GraphEdge& b) {
              return std::make_pair(a.u, a.v) < std::make_pair(b.u, b.v);
            });
  return sub;
}

Eigen::MatrixXd layout_component(const SimilarityGraph& sub,
                                 const LayoutParams& params,
                                 std::uint64_t component_tag, int level,
                                 bool& converged, int& deepest) {
  deepest = std::max(deepest, level);
  const int n = sub.num_vertices;
  if (n == 1) return Eigen::MatrixXd::Zero(1, 2);

  if (n >= params.min_size) {
    CoarsenResult c = coarsen(sub);
    const double ratio =
        static_cast<double>(c.coarse.num_vertices) / static_cast<double>(n);
    if (c.coarse.num_vertices < n && ratio <= params.coarsen_ratio) {
      Eigen::MatrixXd coarse = layout_component(c.coarse, params,
                                                component_tag, level + 1,
                                                converged, deepest);
      Eigen::MatrixXd init(n, 2);
      for (int i = 0; i < n; ++i) init.row(i) = coarse.row(c.parent[i]);
      RefineResult r = refine_layout(sub, std::move(init), params);
      converged = converged && r.converged;
      return std::move(r.coords);
    }
  }

  // coarsest level: seeded random start in a square sized to the graph
  Rng rng(derive_seed(params.seed,
                      {kTagLayout, component_tag,
                       static_cast<std::uint64_t>(level)}));
  const double side = std::sqrt(static_cast<double>(n)) * params.k;
  Eigen::MatrixXd init(n, 2);
  for (int i = 0; i < n; ++i) {
    init(i, 0) = rng.uniform(0.0, side);
    init(i, 1) = rng.uniform(0.0, side);
  }
  RefineResult r = refine_layout(sub, std::move(init), params);
  converged = converged && r.converged;
  return std::move(r.coords);
}

}  // namespace

LayoutResult multilevel_layout(const SimilarityGraph& g,
                               const LayoutParams& params) {
  validate_graph(g);
  if (params.k <= 0 || params.tol <= 0 || params.min_size < 2 ||
      params.coarsen_ratio <= 0 || params.coarsen_ratio >= 1 ||
      params.max_iterations_per_level < 1 || params.theta < 0)
    throw std::invalid_argument("invalid layout parameters");

  LayoutResult out;
  out.coords = Eigen::MatrixXd::Zero(g.num_vertices, 2);
  if (g.num_vertices == 0) return out;

  // connected components, each listed in ascending vertex order
  const auto adj = adjacency(g);
  std::vector<int> component(g.num_vertices, -1);
  std::vector<std::vector<int>> members;
  for (int s = 0; s < g.num_vertices; ++s) {
    if (component[s] >= 0) continue;
    const int id = static_cast<int>(members.size());
    std::vector<int> queue{s};
    component[s] = id;
    members.emplace_back();
    while (!queue.empty()) {
      const int u = queue.back();
      queue.pop_back();
      members[id].push_back(u);
      for (const auto& [v, w] : adj[u]) {
        (void)w;
        if (component[v] < 0) {
          component[v] = id;
          queue.push_back(v);
        }
      }
    }
    std::sort(members[id].begin(), members[id].end());
  }

  std::vector<int> local_of(g.num_vertices, -1);
  double cursor = 0.0;
  for (const std::vector<int>& vertices : members) {
    std::fill(local_of.begin(), local_of.end(), -1);
    SimilarityGraph sub = induced_subgraph(g, vertices, local_of);
    int deepest = 0;
    Eigen::MatrixXd coords = layout_component(
        sub, params, static_cast<std::uint64_t>(vertices.front()), 0,
        out.converged, deepest);
    out.levels = std::max(out.levels, deepest);

    if (members.size() > 1) {
      // tile components left to right, one k gap apart, bottoms aligned
      const double min_x = coords.col(0).minCoeff();
      const double min_y = coords.col(1).minCoeff();
      const double width = coords.col(0).maxCoeff() - min_x;
      coords.col(0).array() += cursor - min_x;
      coords.col(1).array() -= min_y;
      cursor += width + params.k;
    }
    for (size_t i = 0; i < vertices.size(); ++i)
      out.coords.row(vertices[i]) = coords.row(static_cast<int>(i));
  }
  return out;
}

SimilarityGraph device_similarity_graph(const Eigen::MatrixXd& features,
                                        const std::vector<int>& labels,
                                        int num_neighbours) {
  const int n = static_cast<int>(features.rows());
  if (n < 2)
    throw std::invalid_argument("similarity graph needs at least 2 vectors");
  if (!labels.empty() && static_cast<int>(labels.size()) != n)
    throw std::invalid_argument("label count mismatch");
  if (num_neighbours < 1 || num_neighbours > n - 1)
    throw std::invalid_argument("neighbour count must be in [1, n-1]");

  SimilarityGraph g;
  g.num_vertices = n;
  g.labels = labels;
  g.ids.reserve(n);
  for (int i = 0; i < n; ++i) g.ids.push_back(std::to_string(i));

  std::set<std::pair<int, int>> chosen;
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<double, int>> order;
    order.reserve(n - 1);
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      order.push_back({(features.row(i) - features.row(j)).norm(), j});
    }
    std::sort(order.begin(), order.end());
    for (int t = 0; t < num_neighbours; ++t)
      chosen.insert({std::min(i, order[t].second),
                     std::max(i, order[t].second)});
  }
  for (const auto& [u, v] : chosen) {
    const double d = (features.row(u) - features.row(v)).norm();
    g.edges.push_back({u, v, 1.0 / (1.0 + d)});
  }
  return g;
}

}  // namespace nilm
