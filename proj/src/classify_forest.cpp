#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <stdexcept>

#include "nilm/classify.hpp"
#include "nilm/parallel.hpp"
#include "nilm/rng.hpp"

namespace nilm {

namespace {

constexpr std::uint64_t kTagTree = 0x7261e5;

struct PendingNode {
  int node_index;
  std::vector<int> rows;  // indices into the bootstrap sample
};

double gini(const std::vector<double>& histogram, double total) {
  double sum_sq = 0.0;
  for (double c : histogram) sum_sq += c * c;
  return 1.0 - sum_sq / (total * total);
}

std::vector<double> count_labels(const std::vector<int>& rows,
                                 const std::vector<int>& slots,
                                 int num_classes) {
  std::vector<double> hist(num_classes, 0.0);
  for (int r : rows) hist[slots[r]] += 1.0;
  return hist;
}

// m distinct feature indices by partial Fisher-Yates, ascending afterwards
// so candidate order is independent of draw order.
std::vector<int> sample_features(Rng& rng, int d, int m) {
  std::vector<int> pool(d);
  for (int i = 0; i < d; ++i) pool[i] = i;
  for (int i = 0; i < m; ++i) {
    int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(d - i)));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(m);
  std::sort(pool.begin(), pool.end());
  return pool;
}

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;  // weighted child Gini
};

SplitChoice best_split(const Eigen::MatrixXd& X, const std::vector<int>& slots,
                       const std::vector<int>& rows,
                       const std::vector<int>& features, int num_classes,
                       int min_samples_leaf) {
  SplitChoice best;
  const double n = static_cast<double>(rows.size());
  for (int f : features) {
    std::vector<std::pair<double, int>> ordered(rows.size());
    for (size_t i = 0; i < rows.size(); ++i)
      ordered[i] = {X(rows[i], f), slots[rows[i]]};
    std::sort(ordered.begin(), ordered.end());

    std::vector<double> left(num_classes, 0.0);
    std::vector<double> right(num_classes, 0.0);
    for (const auto& [v, s] : ordered) right[s] += 1.0;

    for (size_t i = 0; i + 1 < ordered.size(); ++i) {
      left[ordered[i].second] += 1.0;
      right[ordered[i].second] -= 1.0;
      if (ordered[i].first == ordered[i + 1].first) continue;
      const double nl = static_cast<double>(i + 1);
      const double nr = n - nl;
      if (nl < min_samples_leaf || nr < min_samples_leaf) continue;
      const double impurity = (nl * gini(left, nl) + nr * gini(right, nr)) / n;
      if (!best.found || impurity < best.impurity - 1e-12) {
        best.found = true;
        best.feature = f;
        best.threshold = (ordered[i].first + ordered[i + 1].first) / 2.0;
        best.impurity = impurity;
      }
    }
  }
  return best;
}

DecisionTree grow_tree(const Eigen::MatrixXd& X, const std::vector<int>& slots,
                       int num_classes, const ForestParams& params,
                       std::uint64_t tree_seed) {
  Rng rng(tree_seed);
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());
  const int draws = std::max(
      1, static_cast<int>(std::lround(params.bag_fraction * n)));
  std::vector<int> sample(draws);
  for (int i = 0; i < draws; ++i)
    sample[i] = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));

  const int features_per_node =
      static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));

  DecisionTree tree;
  tree.nodes.emplace_back();
  std::deque<PendingNode> queue;
  {
    std::vector<int> all(draws);
    for (int i = 0; i < draws; ++i) all[i] = sample[i];
    queue.push_back({0, std::move(all)});
  }

  int internal_nodes = 0;
  while (!queue.empty()) {
    PendingNode pending = std::move(queue.front());
    queue.pop_front();
    std::vector<double> hist =
        count_labels(pending.rows, slots, num_classes);

    const double total = static_cast<double>(pending.rows.size());
    const bool pure = *std::max_element(hist.begin(), hist.end()) == total;
    const bool splittable =
        !pure && internal_nodes < params.max_internal_nodes &&
        static_cast<int>(pending.rows.size()) >= 2 * params.min_samples_leaf;

    if (splittable) {
      std::vector<int> features = sample_features(rng, d, features_per_node);
      SplitChoice split = best_split(X, slots, pending.rows, features,
                                     num_classes, params.min_samples_leaf);
      // only spend node budget on splits that actually reduce impurity
      if (split.found && split.impurity < gini(hist, total) - 1e-12) {
        ++internal_nodes;
        std::vector<int> left_rows, right_rows;
        for (int r : pending.rows)
          (X(r, split.feature) <= split.threshold ? left_rows : right_rows)
              .push_back(r);
        const int node_index = pending.node_index;
        const int li = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        const int ri = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        TreeNode& parent = tree.nodes[node_index];  // refresh after growth
        parent.feature = split.feature;
        parent.threshold = split.threshold;
        parent.left = li;
        parent.right = ri;
        queue.push_back({li, std::move(left_rows)});
        queue.push_back({ri, std::move(right_rows)});
        continue;
      }
    }
    tree.nodes[pending.node_index].histogram = std::move(hist);
  }
  return tree;
}

}  // namespace

DecisionForestModel train_forest(const Eigen::MatrixXd& X,
                                 const std::vector<int>& y,
                                 const ForestParams& params, int jobs) {
  if (X.rows() == 0 || X.cols() == 0)
    throw std::invalid_argument("forest training needs a non-empty matrix");
  if (static_cast<int>(y.size()) != X.rows())
    throw std::invalid_argument("label count does not match row count");
  if (params.num_trees < 1 || params.max_internal_nodes < 1 ||
      params.min_samples_leaf < 1 || params.bag_fraction <= 0.0)
    throw std::invalid_argument("invalid forest parameters");

  DecisionForestModel model;
  model.params = params;
  model.num_features = static_cast<int>(X.cols());
  std::set<int> codes(y.begin(), y.end());
  model.class_codes.assign(codes.begin(), codes.end());

  std::vector<int> slots(y.size());
  for (size_t i = 0; i < y.size(); ++i)
    slots[i] = static_cast<int>(
        std::lower_bound(model.class_codes.begin(), model.class_codes.end(),
                         y[i]) -
        model.class_codes.begin());

  const int num_classes = static_cast<int>(model.class_codes.size());
  model.trees.resize(params.num_trees);
  parallel_for(jobs, params.num_trees, [&](int b) {
    model.trees[b] =
        grow_tree(X, slots, num_classes, params,
                  derive_seed(params.seed, {kTagTree, (std::uint64_t)b}));
  });
  return model;
}

Eigen::VectorXd predict_forest(const DecisionForestModel& model,
                               const Eigen::VectorXd& x) {
  if (x.size() != model.num_features)
    throw std::invalid_argument("feature dimension mismatch");
  const int num_classes = static_cast<int>(model.class_codes.size());
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(num_classes);
  for (const DecisionTree& tree : model.trees) {
    int idx = 0;
    while (!tree.nodes[idx].is_leaf()) {
      const TreeNode& node = tree.nodes[idx];
      idx = x[node.feature] <= node.threshold ? node.left : node.right;
    }
    for (int c = 0; c < num_classes; ++c)
      sum[c] += tree.nodes[idx].histogram[c];
  }
  return sum / sum.sum();
}

int predict_forest_label(const DecisionForestModel& model,
                         const Eigen::VectorXd& x) {
  Eigen::VectorXd p = predict_forest(model, x);
  int best = 0;
  for (int c = 1; c < p.size(); ++c)
    if (p[c] > p[best]) best = c;
  return model.class_codes[best];
}

}  // namespace nilm
