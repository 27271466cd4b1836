#include "nilm/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace nilm {

const char* to_string(ScoreMethod method) {
  switch (method) {
    case ScoreMethod::Flda:
      return "flda";
    case ScoreMethod::Spearman:
      return "spearman";
  }
  return "?";
}

namespace {

void check_shape(const Eigen::MatrixXd& X, const std::vector<int>& y) {
  if (X.rows() == 0 || X.cols() == 0)
    throw std::invalid_argument("feature matrix is empty");
  if (static_cast<int>(y.size()) != X.rows())
    throw std::invalid_argument("label count does not match row count");
}

std::vector<std::pair<int, double>> sorted_scores(
    const Eigen::VectorXd& raw) {
  std::vector<std::pair<int, double>> out(raw.size());
  for (int j = 0; j < raw.size(); ++j) out[j] = {j, raw[j]};
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second > b.second;
                     return a.first < b.first;
                   });
  return out;
}

}  // namespace

ScatterMatrices scatter_matrices(const Eigen::MatrixXd& X,
                                 const std::vector<int>& y) {
  check_shape(X, y);
  const int d = static_cast<int>(X.cols());

  std::map<int, std::vector<int>> rows_by_class;
  for (int i = 0; i < X.rows(); ++i) rows_by_class[y[i]].push_back(i);
  const int C = static_cast<int>(rows_by_class.size());
  if (C < 2)
    throw std::invalid_argument("scatter matrices need at least two classes");

  ScatterMatrices out;
  out.grand_mean = X.colwise().mean();
  out.class_means = Eigen::MatrixXd::Zero(C, d);
  out.within = Eigen::MatrixXd::Zero(d, d);
  out.between = Eigen::MatrixXd::Zero(d, d);

  int ci = 0;
  for (const auto& [code, rows] : rows_by_class) {
    out.class_codes.push_back(code);
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
    for (int i : rows) mu += X.row(i).transpose();
    mu /= static_cast<double>(rows.size());
    out.class_means.row(ci) = mu.transpose();
    for (int i : rows) {
      Eigen::VectorXd dx = X.row(i).transpose() - mu;
      out.within += dx * dx.transpose();
    }
    Eigen::VectorXd dm = mu - out.grand_mean;
    out.between += dm * dm.transpose();
    ++ci;
  }
  out.between /= static_cast<double>(C);
  return out;
}

FeatureScores flda_scores(const Eigen::MatrixXd& X, const std::vector<int>& y) {
  ScatterMatrices s = scatter_matrices(X, y);
  const int d = static_cast<int>(X.cols());
  const double eps = 1e-6 * s.within.trace() / d + 1e-12;
  Eigen::VectorXd raw(d);
  for (int j = 0; j < d; ++j)
    raw[j] = s.between(j, j) / (s.within(j, j) + eps);
  FeatureScores out;
  out.method = ScoreMethod::Flda;
  out.scores = sorted_scores(raw);
  return out;
}

FldaProjection flda_projection(const Eigen::MatrixXd& X,
                               const std::vector<int>& y) {
  ScatterMatrices s = scatter_matrices(X, y);
  const int d = static_cast<int>(X.cols());
  const int C = static_cast<int>(s.class_codes.size());
  const double eps = 1e-6 * s.within.trace() / d + 1e-12;

  Eigen::MatrixXd Sw = s.within + eps * Eigen::MatrixXd::Identity(d, d);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(s.between,
                                                                   Sw);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("generalized eigensolver failed");

  // Eigenvalues come back ascending; take the tail, largest first.
  const int m = std::min(C - 1, d);
  FldaProjection out;
  out.w = Eigen::MatrixXd(d, m);
  for (int j = 0; j < m; ++j)
    out.w.col(j) = solver.eigenvectors().col(d - 1 - j);

  Eigen::MatrixXd projected_means = s.class_means * out.w;  // C x m
  out.bias = projected_means.colwise().mean().transpose();
  return out;
}

Eigen::VectorXd average_ranks(const Eigen::VectorXd& values) {
  const int n = static_cast<int>(values.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return values[a] < values[b]; });
  Eigen::VectorXd ranks(n);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // positions i..j (0-based) tie; each gets the mean of ranks i+1..j+1
    const double r = (i + j) / 2.0 + 1.0;
    for (int k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman_rho(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("rank inputs differ in length");
  const int n = static_cast<int>(a.size());
  if (n < 2) throw std::invalid_argument("spearman needs at least two points");
  Eigen::VectorXd ra = average_ranks(a);
  Eigen::VectorXd rb = average_ranks(b);
  const double d2 = (ra - rb).squaredNorm();
  return 1.0 - 6.0 * d2 / (static_cast<double>(n) * (static_cast<double>(n) * n - 1.0));
}

FeatureScores spearman_scores(const Eigen::MatrixXd& X,
                              const std::vector<int>& y) {
  check_shape(X, y);
  Eigen::VectorXd labels(X.rows());
  for (int i = 0; i < X.rows(); ++i) labels[i] = static_cast<double>(y[i]);
  Eigen::VectorXd raw(X.cols());
  for (int j = 0; j < X.cols(); ++j)
    raw[j] = std::abs(spearman_rho(X.col(j), labels));
  FeatureScores out;
  out.method = ScoreMethod::Spearman;
  out.scores = sorted_scores(raw);
  return out;
}

std::vector<int> select_top_k(const FeatureScores& scores, int k) {
  if (k < 1 || k > static_cast<int>(scores.scores.size()))
    throw std::invalid_argument("selection size out of range");
  std::vector<int> out(k);
  for (int i = 0; i < k; ++i) out[i] = scores.scores[i].first;
  return out;
}

}  // namespace nilm
