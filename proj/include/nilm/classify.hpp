#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "nilm/features.hpp"
#include "nilm/preprocess.hpp"

namespace nilm {

struct ForestParams {
  int num_trees = 32;
  int max_internal_nodes = 128;  // per tree
  int min_samples_leaf = 1;
  double bag_fraction = 1.0;  // bootstrap draws = round(fraction * n), with replacement
  std::uint64_t seed = 1;
};

// feature < 0 marks a leaf; leaves carry raw label counts (one slot per
// class code, in class_codes order).
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> histogram;
  bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct DecisionForestModel {
  ForestParams params;
  std::vector<int> class_codes;  // sorted distinct training labels
  int num_features = 0;
  std::vector<DecisionTree> trees;
};

// Each tree grows greedily (breadth-first) on its own bootstrap resample,
// sampling ceil(sqrt(d)) candidate features per node with midpoint
// thresholds, until purity or the internal-node cap.
DecisionForestModel train_forest(const Eigen::MatrixXd& X,
                                 const std::vector<int>& y,
                                 const ForestParams& params, int jobs = 1);

// Sums raw leaf histograms over all trees, then normalizes to sum 1.
// Entries follow model.class_codes order.
Eigen::VectorXd predict_forest(const DecisionForestModel& model,
                               const Eigen::VectorXd& x);

// argmax of predict_forest; ties go to the lower class code.
int predict_forest_label(const DecisionForestModel& model,
                         const Eigen::VectorXd& x);

struct SvmParams {
  double C = 1.0;
  int degree = 2;      // polynomial kernel (x.z + coef0)^degree
  double coef0 = 1.0;  // degree 1, coef0 0 gives a plain linear kernel
  double kkt_tolerance = 1e-3;
  long max_iterations = 200000;  // per binary machine
};

double polynomial_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                         const SvmParams& params);

struct BinarySvm {
  Eigen::MatrixXd support_vectors;  // one row per support vector
  Eigen::VectorXd coefficients;     // alpha_i * y_i per support vector
  double bias = 0.0;
  double kkt_residual = 0.0;  // duality-gap measure at termination
  bool converged = true;
};

struct SvmOvaModel {
  SvmParams params;
  std::vector<int> class_codes;
  int num_features = 0;
  std::vector<BinarySvm> machines;  // one per class code, same order
};

// One soft-margin binary machine per label ({+1} vs rest), solved by
// two-coefficient dual decomposition with maximal-violating-pair selection.
SvmOvaModel train_svm_ova(const Eigen::MatrixXd& X, const std::vector<int>& y,
                          const SvmParams& params, int jobs = 1);

double svm_decision_value(const BinarySvm& machine, const SvmParams& params,
                          const Eigen::VectorXd& x);

// Per-label decision values, model.class_codes order.
Eigen::VectorXd svm_decision_values(const SvmOvaModel& model,
                                    const Eigen::VectorXd& x);

// argmax decision value; ties go to the lower class code.
int predict_svm_label(const SvmOvaModel& model, const Eigen::VectorXd& x);

// Per-class shuffles dealt round-robin, so fold class counts differ by at
// most 1 from perfect proportion. Rejects any class with fewer than k rows.
// Returned fold index lists are ascending.
std::vector<std::vector<int>> stratified_folds(const std::vector<int>& y,
                                               int k, std::uint64_t seed);

// Mann-Whitney rank statistic; tied scores earn 0.5 credit. Needs at least
// one positive and one negative.
double auc_mann_whitney(const Eigen::VectorXd& scores,
                        const std::vector<bool>& positive);

struct ClassMetrics {
  int label_code = 0;
  double sensitivity = 0.0;  // TP / (TP + FN)
  double specificity = 0.0;  // TN / (TN + FP)
  double auc = 0.0;
  long tp = 0, fn = 0, fp = 0, tn = 0;
};

struct EvalResult {
  std::vector<ClassMetrics> per_class;  // class_codes order
  double macro_sensitivity = 0.0;
  double macro_specificity = 0.0;
  double macro_auc = 0.0;
  double accuracy = 0.0;
};

enum class ModelKind { Forest, Svm };
enum class SelectorKind { Flda, Spearman, None };

const char* to_string(ModelKind kind);
const char* to_string(SelectorKind kind);
ModelKind model_kind_from_string(const std::string& s);     // forest|svm
SelectorKind selector_from_string(const std::string& s);    // flda|sc|none

struct PipelineSpec {
  ModelKind model = ModelKind::Forest;
  SelectorKind selector = SelectorKind::Flda;
  int top_k = 4;   // features kept when selector != None
  int k_folds = 10;
  std::uint64_t seed = 1;
  ForestParams forest;
  SvmParams svm;
};

// Stratified k-fold on X as given (already normalized/selected): per fold,
// train on the rest and score the held-out rows; confusion counts and AUC
// scores are pooled over all folds.
EvalResult evaluate_kfold(const Eigen::MatrixXd& X, const std::vector<int>& y,
                          int k, ModelKind kind, const ForestParams& forest,
                          const SvmParams& svm, std::uint64_t seed,
                          int jobs = 1);

struct PipelineResult {
  std::vector<int> selected_features;
  EvalResult eval;
};

// Full evaluation path over a raw-magnitude corpus: min-max normalize,
// score and select feature columns, then evaluate_kfold on the selection.
PipelineResult evaluate_pipeline(const Eigen::MatrixXd& X_raw,
                                 const std::vector<int>& y,
                                 const PipelineSpec& spec, int jobs = 1);

struct GridEntry {
  ModelKind model;
  SelectorKind selector;
  PipelineResult result;
};

// The {Forest, Svm} x {Flda, Spearman} grid on shared folds.
std::vector<GridEntry> compare_configurations(const Eigen::MatrixXd& X_raw,
                                              const std::vector<int>& y,
                                              const PipelineSpec& base,
                                              int jobs = 1);

// A trained end-to-end classifier: normalization stats over the full raw
// feature width, the kept column indices, and one fitted model.
struct PipelineModel {
  ModelKind kind = ModelKind::Forest;
  SelectorKind selector = SelectorKind::Flda;
  std::vector<int> selected_features;
  MinMaxStats stats;
  DecisionForestModel forest;  // used when kind == Forest
  SvmOvaModel svm;             // used when kind == Svm
};

PipelineModel train_pipeline(const Eigen::MatrixXd& X_raw,
                             const std::vector<int>& y,
                             const PipelineSpec& spec, int jobs = 1);

const std::vector<int>& pipeline_class_codes(const PipelineModel& model);

// Scores for a raw (unnormalized) feature vector of the training width:
// forest probabilities or SVM decision values, class_codes order.
Eigen::VectorXd pipeline_scores(const PipelineModel& model,
                                const Eigen::VectorXd& raw);

struct PipelinePrediction {
  int label_code = 0;
  double confidence = 0.0;  // forest: top probability; svm: logistic(margin)
};

PipelinePrediction predict_pipeline(const PipelineModel& model,
                                    const Eigen::VectorXd& raw);

// Optional random-search harness over (trees, nodes, C, degree); scores each
// draw by macro AUC of spec.model under evaluate_pipeline.
struct TuneResult {
  ForestParams forest;
  SvmParams svm;
  double macro_auc = 0.0;
};

TuneResult tune_random_search(const Eigen::MatrixXd& X_raw,
                              const std::vector<int>& y,
                              const PipelineSpec& spec, int iterations,
                              std::uint64_t seed, int jobs = 1);

}  // namespace nilm
