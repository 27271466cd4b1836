#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <doctest.h>

#include "nilm/classify.hpp"
#include "nilm/preprocess.hpp"
#include "nilm/rng.hpp"
#include "nilm/signal_model.hpp"
#include "oracles.hpp"

using namespace nilm;

namespace {

// Two well-separated Gaussian blobs per class around distinct centers.
struct Blobs {
  Eigen::MatrixXd X;
  std::vector<int> y;
};

Blobs make_blobs(int per_class, int classes, int dims, double spread,
                 std::uint64_t seed) {
  Rng rng(seed);
  Blobs out;
  out.X = Eigen::MatrixXd(per_class * classes, dims);
  out.y.resize(per_class * classes);
  for (int c = 0; c < classes; ++c)
    for (int i = 0; i < per_class; ++i) {
      const int r = c * per_class + i;
      out.y[r] = c;
      for (int d = 0; d < dims; ++d)
        out.X(r, d) = c * 10.0 + rng.uniform(-spread, spread);
    }
  return out;
}

}  // namespace

TEST_SUITE("classify") {
  TEST_CASE("stratified folds partition the rows with balance within one") {
    Rng rng(41);
    for (int trial = 0; trial < 50; ++trial) {
      const int k = 2 + static_cast<int>(rng.below(9));
      std::vector<int> y;
      const int classes = 2 + static_cast<int>(rng.below(4));
      for (int c = 0; c < classes; ++c) {
        const int count = k + static_cast<int>(rng.below(40));
        for (int i = 0; i < count; ++i) y.push_back(c);
      }
      Rng shuffle_rng(trial);
      shuffle_rng.shuffle(y);

      const auto folds = stratified_folds(y, k, 7);
      REQUIRE(static_cast<int>(folds.size()) == k);

      std::set<int> seen;
      for (const auto& fold : folds) {
        CHECK(std::is_sorted(fold.begin(), fold.end()));
        for (int idx : fold) CHECK(seen.insert(idx).second);
      }
      CHECK(seen.size() == y.size());

      // per-class counts across folds differ by at most one
      for (int c = 0; c < classes; ++c) {
        int lo = 1 << 30, hi = 0;
        for (const auto& fold : folds) {
          int n = 0;
          for (int idx : fold) n += y[idx] == c;
          lo = std::min(lo, n);
          hi = std::max(hi, n);
        }
        CHECK(hi - lo <= 1);
      }
    }
  }

  TEST_CASE("folds reject a class with fewer rows than folds") {
    std::vector<int> y = {0, 0, 0, 1};
    CHECK_THROWS_WITH_AS(stratified_folds(y, 3, 1),
                         doctest::Contains("fewer"),
                         std::invalid_argument);
  }

  TEST_CASE("auc equals ordered-pair counting on 1000 random score sets") {
    Rng rng(42);
    for (int trial = 0; trial < 1000; ++trial) {
      const int n = 2 + static_cast<int>(rng.below(199));
      Eigen::VectorXd scores(n);
      std::vector<bool> positive(n);
      bool has_pos = false, has_neg = false;
      for (int i = 0; i < n; ++i) {
        // coarse grid forces frequent ties
        scores[i] = static_cast<double>(rng.below(12)) / 4.0;
        positive[i] = rng.uniform01() < 0.4;
        (positive[i] ? has_pos : has_neg) = true;
      }
      if (!has_pos) positive[0] = true;
      if (!has_neg) positive[n > 1 ? 1 : 0] = false;
      if (n == 1) continue;

      std::vector<double> raw(scores.data(), scores.data() + n);
      const double expected = oracle::pair_count_auc(raw, positive);
      const double got = auc_mann_whitney(scores, positive);
      CHECK(std::abs(got - expected) < 1e-9);
    }
  }

  TEST_CASE("auc equals the trapezoid area under the ROC curve") {
    Rng rng(43);
    for (int trial = 0; trial < 300; ++trial) {
      const int n = 4 + static_cast<int>(rng.below(80));
      Eigen::VectorXd scores(n);
      std::vector<bool> positive(n);
      for (int i = 0; i < n; ++i) {
        scores[i] = static_cast<double>(rng.below(9));
        positive[i] = i % 2 == 0;
      }
      std::vector<double> raw(scores.data(), scores.data() + n);
      CHECK(std::abs(auc_mann_whitney(scores, positive) -
                     oracle::trapezoid_auc(raw, positive)) < 1e-9);
    }
  }

  TEST_CASE("auc is invariant under strictly monotone score transforms") {
    Rng rng(44);
    const int n = 120;
    Eigen::VectorXd scores(n), warped(n);
    std::vector<bool> positive(n);
    for (int i = 0; i < n; ++i) {
      scores[i] = rng.uniform(-3, 3);
      warped[i] = std::tanh(scores[i]) * 7.0 + 11.0;
      positive[i] = rng.uniform01() < 0.5;
    }
    positive[0] = true;
    positive[1] = false;
    CHECK(auc_mann_whitney(scores, positive) ==
          doctest::Approx(auc_mann_whitney(warped, positive)).epsilon(1e-12));
  }

  TEST_CASE("forest probabilities are a distribution and fit separable data") {
    const Blobs blobs = make_blobs(30, 3, 4, 1.0, 45);
    ForestParams params;
    params.seed = 3;
    const DecisionForestModel model = train_forest(blobs.X, blobs.y, params);
    CHECK(model.class_codes == std::vector<int>{0, 1, 2});
    CHECK(static_cast<int>(model.trees.size()) == params.num_trees);

    int correct = 0;
    for (int r = 0; r < blobs.X.rows(); ++r) {
      const Eigen::VectorXd p =
          predict_forest(model, blobs.X.row(r).transpose());
      CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(p.minCoeff() >= 0.0);
      correct +=
          predict_forest_label(model, blobs.X.row(r).transpose()) == blobs.y[r];
    }
    CHECK(correct == blobs.X.rows());
  }

  TEST_CASE("forest training is identical for any job count") {
    const Blobs blobs = make_blobs(20, 3, 4, 4.0, 46);
    ForestParams params;
    params.seed = 11;
    const DecisionForestModel a = train_forest(blobs.X, blobs.y, params, 1);
    const DecisionForestModel b = train_forest(blobs.X, blobs.y, params, 4);
    REQUIRE(a.trees.size() == b.trees.size());
    for (std::size_t t = 0; t < a.trees.size(); ++t) {
      REQUIRE(a.trees[t].nodes.size() == b.trees[t].nodes.size());
      for (std::size_t n = 0; n < a.trees[t].nodes.size(); ++n) {
        const TreeNode& na = a.trees[t].nodes[n];
        const TreeNode& nb = b.trees[t].nodes[n];
        CHECK(na.feature == nb.feature);
        CHECK(na.threshold == nb.threshold);
        CHECK(na.histogram == nb.histogram);
      }
    }
  }

  TEST_CASE("forest respects the internal node budget") {
    Rng rng(47);
    Eigen::MatrixXd X(200, 3);
    std::vector<int> y(200);
    for (int r = 0; r < 200; ++r) {
      for (int c = 0; c < 3; ++c) X(r, c) = rng.uniform(0, 1);
      y[r] = static_cast<int>(rng.below(2));  // noise labels force deep trees
    }
    ForestParams params;
    params.max_internal_nodes = 16;
    const DecisionForestModel model = train_forest(X, y, params);
    for (const DecisionTree& tree : model.trees) {
      int internal = 0;
      for (const TreeNode& node : tree.nodes) internal += !node.is_leaf();
      CHECK(internal <= 16);
    }
  }

  TEST_CASE("forest tie-break goes to the lower class code") {
    // hand-built single-leaf model with an exactly tied histogram
    DecisionForestModel model;
    model.class_codes = {1, 3};
    model.num_features = 1;
    TreeNode leaf;
    leaf.histogram = {2.0, 2.0};
    DecisionTree tree;
    tree.nodes.push_back(leaf);
    model.trees.push_back(tree);

    Eigen::VectorXd q(1);
    q << 1.0;
    const Eigen::VectorXd p = predict_forest(model, q);
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(0.5));
    CHECK(predict_forest_label(model, q) == 1);
  }

  TEST_CASE("svm solves a linearly separable pair within tolerance") {
    const Blobs blobs = make_blobs(25, 2, 3, 1.5, 48);
    SvmParams params;
    params.degree = 1;
    params.coef0 = 0.0;
    params.C = 10.0;
    const SvmOvaModel model = train_svm_ova(blobs.X, blobs.y, params);
    REQUIRE(model.machines.size() == 2);
    for (const BinarySvm& machine : model.machines) {
      CHECK(machine.converged);
      CHECK(machine.kkt_residual <= params.kkt_tolerance);
    }
    for (int r = 0; r < blobs.X.rows(); ++r)
      CHECK(predict_svm_label(model, blobs.X.row(r).transpose()) ==
            blobs.y[r]);
  }

  TEST_CASE("svm decision values flip sign across a symmetric margin") {
    // 1D points -1 (negative class) and +1 (positive class)
    Eigen::MatrixXd X(4, 1);
    X << -1, -1.2, 1, 1.2;
    const std::vector<int> y = {0, 0, 1, 1};
    SvmParams params;
    params.degree = 1;
    params.coef0 = 0.0;
    const SvmOvaModel model = train_svm_ova(X, y, params);
    Eigen::VectorXd q(1);
    q << -1.0;
    const Eigen::VectorXd d = svm_decision_values(model, q);
    CHECK(d[0] > 0.0);  // machine for class 0 says "inside"
    CHECK(d[1] < 0.0);
    q << 1.0;
    const Eigen::VectorXd d2 = svm_decision_values(model, q);
    CHECK(d2[0] < 0.0);
    CHECK(d2[1] > 0.0);
  }

  TEST_CASE("polynomial kernel matches the closed form") {
    Eigen::VectorXd a(3), b(3);
    a << 1, 2, 3;
    b << -1, 0.5, 2;
    SvmParams params;
    params.degree = 2;
    params.coef0 = 1.0;
    const double dot = a.dot(b);
    CHECK(polynomial_kernel(a, b, params) ==
          doctest::Approx((dot + 1.0) * (dot + 1.0)));
    params.degree = 3;
    params.coef0 = 0.5;
    CHECK(polynomial_kernel(a, b, params) ==
          doctest::Approx(std::pow(dot + 0.5, 3)));
  }

  TEST_CASE("svm training matches across job counts") {
    const Blobs blobs = make_blobs(15, 3, 3, 2.0, 49);
    SvmParams params;
    const SvmOvaModel a = train_svm_ova(blobs.X, blobs.y, params, 1);
    const SvmOvaModel b = train_svm_ova(blobs.X, blobs.y, params, 4);
    REQUIRE(a.machines.size() == b.machines.size());
    for (std::size_t m = 0; m < a.machines.size(); ++m) {
      CHECK(a.machines[m].bias == b.machines[m].bias);
      CHECK((a.machines[m].coefficients.array() ==
             b.machines[m].coefficients.array())
                .all());
    }
  }

  TEST_CASE("kfold metrics are coherent on separable data") {
    const Blobs blobs = make_blobs(30, 3, 4, 1.0, 50);
    const EvalResult result =
        evaluate_kfold(blobs.X, blobs.y, 5, ModelKind::Forest, ForestParams{},
                       SvmParams{}, 17);
    REQUIRE(result.per_class.size() == 3);
    for (const ClassMetrics& m : result.per_class) {
      CHECK(m.tp + m.fn == 30);          // every row scored exactly once
      CHECK(m.fp + m.tn == 60);
      CHECK(m.sensitivity == doctest::Approx(1.0));
      CHECK(m.specificity == doctest::Approx(1.0));
      CHECK(m.auc == doctest::Approx(1.0));
    }
    CHECK(result.accuracy == doctest::Approx(1.0));
    CHECK(result.macro_auc == doctest::Approx(1.0));
  }

  TEST_CASE("kfold rejects a class smaller than k") {
    Eigen::MatrixXd X(5, 2);
    X.setRandom();
    const std::vector<int> y = {0, 0, 0, 0, 1};
    CHECK_THROWS_AS(evaluate_kfold(X, y, 3, ModelKind::Forest, ForestParams{},
                                   SvmParams{}, 1),
                    std::invalid_argument);
  }

  TEST_CASE("kfold is deterministic and jobs-invariant") {
    const Blobs blobs = make_blobs(12, 3, 4, 6.0, 51);
    const EvalResult a = evaluate_kfold(blobs.X, blobs.y, 4, ModelKind::Forest,
                                        ForestParams{}, SvmParams{}, 23, 1);
    const EvalResult b = evaluate_kfold(blobs.X, blobs.y, 4, ModelKind::Forest,
                                        ForestParams{}, SvmParams{}, 23, 4);
    for (std::size_t c = 0; c < a.per_class.size(); ++c) {
      CHECK(a.per_class[c].sensitivity == b.per_class[c].sensitivity);
      CHECK(a.per_class[c].specificity == b.per_class[c].specificity);
      CHECK(a.per_class[c].auc == b.per_class[c].auc);
    }
    CHECK(a.accuracy == b.accuracy);
  }

  TEST_CASE("pipeline: selection picks top_k columns and predicts coherently") {
    const WindowCorpus corpus = synth_dataset(SynthParams{});
    const Eigen::MatrixXd F = feature_matrix(corpus, 8);
    std::vector<int> y;
    for (const WindowRow& row : corpus.rows)
      y.push_back(static_cast<int>(row.label));

    PipelineSpec spec;
    spec.top_k = 4;
    spec.k_folds = 5;
    spec.seed = 42;
    const PipelineResult result = evaluate_pipeline(F, y, spec);
    CHECK(result.selected_features.size() == 4);
    CHECK(result.eval.per_class.size() == 5);
    CHECK(result.eval.macro_auc > 0.5);

    const PipelineModel model = train_pipeline(F, y, spec);
    CHECK(pipeline_class_codes(model) == std::vector<int>{0, 1, 2, 3, 4});
    const PipelinePrediction pred =
        predict_pipeline(model, F.row(0).transpose());
    CHECK(pred.confidence >= 0.0);
    CHECK(pred.confidence <= 1.0);
    CHECK(pipeline_scores(model, F.row(0).transpose()).size() == 5);
  }

  TEST_CASE("selector none keeps every column") {
    const Blobs blobs = make_blobs(10, 2, 5, 1.0, 52);
    PipelineSpec spec;
    spec.selector = SelectorKind::None;
    spec.k_folds = 2;
    const PipelineResult result = evaluate_pipeline(blobs.X, blobs.y, spec);
    CHECK(result.selected_features == std::vector<int>{0, 1, 2, 3, 4});
  }

  TEST_CASE("configuration grid covers the four model/selector cells") {
    const Blobs blobs = make_blobs(10, 2, 4, 1.0, 53);
    PipelineSpec base;
    base.k_folds = 2;
    base.top_k = 2;
    const auto grid = compare_configurations(blobs.X, blobs.y, base);
    REQUIRE(grid.size() == 4);
    std::set<std::pair<int, int>> cells;
    for (const GridEntry& entry : grid)
      cells.insert({static_cast<int>(entry.model),
                    static_cast<int>(entry.selector)});
    CHECK(cells.size() == 4);
  }

  TEST_CASE("random search returns the best draw by macro auc") {
    const Blobs blobs = make_blobs(8, 2, 3, 2.0, 54);
    PipelineSpec spec;
    spec.k_folds = 2;
    spec.selector = SelectorKind::None;
    const TuneResult tuned =
        tune_random_search(blobs.X, blobs.y, spec, 3, 99);
    CHECK(tuned.macro_auc >= 0.0);
    CHECK(tuned.macro_auc <= 1.0);
    CHECK(tuned.forest.num_trees >= 8);
    CHECK(tuned.forest.num_trees <= 64);
    CHECK(tuned.svm.degree >= 1);
    CHECK(tuned.svm.degree <= 3);

    const TuneResult again =
        tune_random_search(blobs.X, blobs.y, spec, 3, 99);
    CHECK(tuned.forest.num_trees == again.forest.num_trees);
    CHECK(tuned.svm.C == again.svm.C);
  }
}
