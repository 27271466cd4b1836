#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "nilm/classify.hpp"
#include "nilm/parallel.hpp"
#include "nilm/rng.hpp"

namespace nilm {

namespace {
constexpr std::uint64_t kTagFold = 0xf01d;
constexpr std::uint64_t kTagFoldModel = 0xf01dde1;
constexpr std::uint64_t kTagTune = 0x7e4e;

std::vector<int> distinct_codes(const std::vector<int>& y) {
  std::set<int> codes(y.begin(), y.end());
  return {codes.begin(), codes.end()};
}
}  // namespace

const char* to_string(ModelKind kind) {
  return kind == ModelKind::Forest ? "forest" : "svm";
}

const char* to_string(SelectorKind kind) {
  switch (kind) {
    case SelectorKind::Flda:
      return "flda";
    case SelectorKind::Spearman:
      return "sc";
    case SelectorKind::None:
      return "none";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "forest") return ModelKind::Forest;
  if (s == "svm") return ModelKind::Svm;
  throw std::invalid_argument("unknown model kind: " + s);
}

SelectorKind selector_from_string(const std::string& s) {
  if (s == "flda") return SelectorKind::Flda;
  if (s == "sc") return SelectorKind::Spearman;
  if (s == "none") return SelectorKind::None;
  throw std::invalid_argument("unknown selector: " + s);
}

std::vector<std::vector<int>> stratified_folds(const std::vector<int>& y,
                                               int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("need at least 2 folds");
  std::vector<std::vector<int>> folds(k);
  for (int code : distinct_codes(y)) {
    std::vector<int> rows;
    for (size_t i = 0; i < y.size(); ++i)
      if (y[i] == code) rows.push_back(static_cast<int>(i));
    if (static_cast<int>(rows.size()) < k)
      throw std::invalid_argument(
          "class " + std::to_string(code) + " has " +
          std::to_string(rows.size()) + " samples, fewer than " +
          std::to_string(k) + " folds");
    Rng rng(derive_seed(seed, {kTagFold, static_cast<std::uint64_t>(code)}));
    rng.shuffle(rows);
    for (size_t i = 0; i < rows.size(); ++i)
      folds[i % k].push_back(rows[i]);
  }
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

double auc_mann_whitney(const Eigen::VectorXd& scores,
                        const std::vector<bool>& positive) {
  if (static_cast<size_t>(scores.size()) != positive.size())
    throw std::invalid_argument("score/label length mismatch");
  long n_pos = 0;
  for (bool p : positive) n_pos += p ? 1 : 0;
  const long n_neg = static_cast<long>(positive.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("auc needs both positives and negatives");
  Eigen::VectorXd ranks = average_ranks(scores);
  double rank_sum = 0.0;
  for (int i = 0; i < scores.size(); ++i)
    if (positive[i]) rank_sum += ranks[i];
  return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) /
         (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

EvalResult evaluate_kfold(const Eigen::MatrixXd& X, const std::vector<int>& y,
                          int k, ModelKind kind, const ForestParams& forest,
                          const SvmParams& svm, std::uint64_t seed, int jobs) {
  if (static_cast<int>(y.size()) != X.rows())
    throw std::invalid_argument("label count does not match row count");
  const std::vector<std::vector<int>> folds = stratified_folds(y, k, seed);
  const std::vector<int> codes = distinct_codes(y);
  const int C = static_cast<int>(codes.size());
  const int n = static_cast<int>(X.rows());

  Eigen::MatrixXd scores(n, C);
  std::vector<int> predicted(n, -1);

  parallel_for(jobs, k, [&](int f) {
    std::vector<int> train_rows;
    for (int g = 0; g < k; ++g)
      if (g != f)
        train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
    std::sort(train_rows.begin(), train_rows.end());

    Eigen::MatrixXd Xtr(train_rows.size(), X.cols());
    std::vector<int> ytr(train_rows.size());
    for (size_t i = 0; i < train_rows.size(); ++i) {
      Xtr.row(i) = X.row(train_rows[i]);
      ytr[i] = y[train_rows[i]];
    }

    const std::uint64_t fold_seed =
        derive_seed(seed, {kTagFoldModel, static_cast<std::uint64_t>(f)});
    if (kind == ModelKind::Forest) {
      ForestParams fp = forest;
      fp.seed = fold_seed;
      DecisionForestModel model = train_forest(Xtr, ytr, fp, 1);
      for (int row : folds[f]) {
        Eigen::VectorXd p = predict_forest(model, X.row(row).transpose());
        scores.row(row) = p.transpose();
        int best = 0;
        for (int c = 1; c < p.size(); ++c)
          if (p[c] > p[best]) best = c;
        predicted[row] = model.class_codes[best];
      }
    } else {
      SvmOvaModel model = train_svm_ova(Xtr, ytr, svm, 1);
      for (int row : folds[f]) {
        Eigen::VectorXd d = svm_decision_values(model, X.row(row).transpose());
        scores.row(row) = d.transpose();
        int best = 0;
        for (int c = 1; c < d.size(); ++c)
          if (d[c] > d[best]) best = c;
        predicted[row] = model.class_codes[best];
      }
    }
  });

  EvalResult out;
  long correct = 0;
  for (int i = 0; i < n; ++i) correct += predicted[i] == y[i] ? 1 : 0;
  out.accuracy = static_cast<double>(correct) / n;

  for (int c = 0; c < C; ++c) {
    ClassMetrics cm;
    cm.label_code = codes[c];
    std::vector<bool> positive(n);
    for (int i = 0; i < n; ++i) {
      const bool is_pos = y[i] == codes[c];
      const bool pred_pos = predicted[i] == codes[c];
      positive[i] = is_pos;
      if (is_pos && pred_pos) ++cm.tp;
      if (is_pos && !pred_pos) ++cm.fn;
      if (!is_pos && pred_pos) ++cm.fp;
      if (!is_pos && !pred_pos) ++cm.tn;
    }
    cm.sensitivity = static_cast<double>(cm.tp) / (cm.tp + cm.fn);
    cm.specificity = static_cast<double>(cm.tn) / (cm.tn + cm.fp);
    cm.auc = auc_mann_whitney(scores.col(c), positive);
    out.macro_sensitivity += cm.sensitivity;
    out.macro_specificity += cm.specificity;
    out.macro_auc += cm.auc;
    out.per_class.push_back(cm);
  }
  out.macro_sensitivity /= C;
  out.macro_specificity /= C;
  out.macro_auc /= C;
  return out;
}

namespace {

std::vector<int> pipeline_selection(const Eigen::MatrixXd& X_norm,
                                    const std::vector<int>& y,
                                    SelectorKind selector, int top_k) {
  if (selector == SelectorKind::None) {
    std::vector<int> all(X_norm.cols());
    for (int j = 0; j < X_norm.cols(); ++j) all[j] = j;
    return all;
  }
  FeatureScores scores = selector == SelectorKind::Flda
                             ? flda_scores(X_norm, y)
                             : spearman_scores(X_norm, y);
  return select_top_k(scores, top_k);
}

Eigen::MatrixXd take_columns(const Eigen::MatrixXd& X,
                             const std::vector<int>& cols) {
  Eigen::MatrixXd out(X.rows(), cols.size());
  for (size_t j = 0; j < cols.size(); ++j) out.col(j) = X.col(cols[j]);
  return out;
}

}  // namespace

PipelineResult evaluate_pipeline(const Eigen::MatrixXd& X_raw,
                                 const std::vector<int>& y,
                                 const PipelineSpec& spec, int jobs) {
  NormalizeResult norm = minmax_normalize(X_raw);
  PipelineResult out;
  out.selected_features =
      pipeline_selection(norm.normalized, y, spec.selector, spec.top_k);
  Eigen::MatrixXd Xsel = take_columns(norm.normalized, out.selected_features);
  out.eval = evaluate_kfold(Xsel, y, spec.k_folds, spec.model, spec.forest,
                            spec.svm, spec.seed, jobs);
  return out;
}

std::vector<GridEntry> compare_configurations(const Eigen::MatrixXd& X_raw,
                                              const std::vector<int>& y,
                                              const PipelineSpec& base,
                                              int jobs) {
  std::vector<GridEntry> grid;
  for (ModelKind model : {ModelKind::Forest, ModelKind::Svm}) {
    for (SelectorKind selector :
         {SelectorKind::Flda, SelectorKind::Spearman}) {
      PipelineSpec spec = base;
      spec.model = model;
      spec.selector = selector;
      grid.push_back({model, selector, evaluate_pipeline(X_raw, y, spec, jobs)});
    }
  }
  return grid;
}

PipelineModel train_pipeline(const Eigen::MatrixXd& X_raw,
                             const std::vector<int>& y,
                             const PipelineSpec& spec, int jobs) {
  NormalizeResult norm = minmax_normalize(X_raw);
  PipelineModel model;
  model.kind = spec.model;
  model.selector = spec.selector;
  model.stats = norm.stats;
  model.selected_features =
      pipeline_selection(norm.normalized, y, spec.selector, spec.top_k);
  Eigen::MatrixXd Xsel = take_columns(norm.normalized, model.selected_features);
  if (spec.model == ModelKind::Forest)
    model.forest = train_forest(Xsel, y, spec.forest, jobs);
  else
    model.svm = train_svm_ova(Xsel, y, spec.svm, jobs);
  return model;
}

const std::vector<int>& pipeline_class_codes(const PipelineModel& model) {
  return model.kind == ModelKind::Forest ? model.forest.class_codes
                                         : model.svm.class_codes;
}

Eigen::VectorXd pipeline_scores(const PipelineModel& model,
                                const Eigen::VectorXd& raw) {
  if (raw.size() != static_cast<int>(model.stats.col_min.size()))
    throw std::invalid_argument("feature dimension mismatch");
  Eigen::MatrixXd row = apply_minmax(raw.transpose(), model.stats);
  Eigen::VectorXd x(model.selected_features.size());
  for (size_t j = 0; j < model.selected_features.size(); ++j)
    x[j] = row(0, model.selected_features[j]);
  return model.kind == ModelKind::Forest ? predict_forest(model.forest, x)
                                         : svm_decision_values(model.svm, x);
}

PipelinePrediction predict_pipeline(const PipelineModel& model,
                                    const Eigen::VectorXd& raw) {
  Eigen::VectorXd s = pipeline_scores(model, raw);
  int best = 0;
  for (int c = 1; c < s.size(); ++c)
    if (s[c] > s[best]) best = c;
  PipelinePrediction out;
  out.label_code = pipeline_class_codes(model)[best];
  out.confidence = model.kind == ModelKind::Forest
                       ? s[best]
                       : 1.0 / (1.0 + std::exp(-s[best]));
  return out;
}

TuneResult tune_random_search(const Eigen::MatrixXd& X_raw,
                              const std::vector<int>& y,
                              const PipelineSpec& spec, int iterations,
                              std::uint64_t seed, int jobs) {
  if (iterations < 1)
    throw std::invalid_argument("tuning needs at least one iteration");
  Rng rng(derive_seed(seed, {kTagTune}));
  TuneResult best;
  best.macro_auc = -1.0;
  for (int it = 0; it < iterations; ++it) {
    PipelineSpec cand = spec;
    cand.forest.num_trees = 8 + static_cast<int>(rng.below(57));
    cand.forest.max_internal_nodes = 16 + static_cast<int>(rng.below(241));
    cand.svm.C = std::pow(10.0, rng.uniform(-2.0, 2.0));
    cand.svm.degree = 1 + static_cast<int>(rng.below(3));
    const double auc = evaluate_pipeline(X_raw, y, cand, jobs).eval.macro_auc;
    if (auc > best.macro_auc) {
      best.macro_auc = auc;
      best.forest = cand.forest;
      best.svm = cand.svm;
    }
  }
  return best;
}

}  // namespace nilm
