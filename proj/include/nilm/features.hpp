#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace nilm {

enum class ScoreMethod { Flda, Spearman };

const char* to_string(ScoreMethod method);

// One (feature_index, score) entry per column, sorted descending by score,
// ties broken by lower index.
struct FeatureScores {
  ScoreMethod method = ScoreMethod::Flda;
  std::vector<std::pair<int, double>> scores;
};

struct ScatterMatrices {
  Eigen::MatrixXd within;       // sum_i sum_{x in class i} (x-mu_i)(x-mu_i)^T
  Eigen::MatrixXd between;      // (1/C) sum_i (mu_i-mu)(mu_i-mu)^T
  Eigen::MatrixXd class_means;  // one row per class, in class_codes order
  Eigen::VectorXd grand_mean;   // mean over all rows
  std::vector<int> class_codes; // sorted distinct labels
};

// Requires >= 2 distinct labels (a single class has no between-class
// separation to measure).
ScatterMatrices scatter_matrices(const Eigen::MatrixXd& X,
                                 const std::vector<int>& y);

// Per-feature diagonal Fisher ratio between[j][j] / (within[j][j] + eps),
// with eps = 1e-6 * trace(within)/dim as a ridge against rank deficiency.
FeatureScores flda_scores(const Eigen::MatrixXd& X, const std::vector<int>& y);

// Discriminant directions: top C-1 eigenvectors of the generalized problem
// between * w = lambda * (within + eps*I) * w. The bias is the midpoint
// (centroid) of the projected class means; exposed but not consumed by the
// classifiers.
struct FldaProjection {
  Eigen::MatrixXd w;     // d x (C-1), columns ordered by decreasing eigenvalue
  Eigen::VectorXd bias;  // length C-1
};
FldaProjection flda_projection(const Eigen::MatrixXd& X,
                               const std::vector<int>& y);

// Average ranks (1-based); tied values share the mean of their rank span.
Eigen::VectorXd average_ranks(const Eigen::VectorXd& values);

// rho = 1 - 6*sum(d^2) / (n(n^2-1)) over the two rank sequences.
double spearman_rho(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Per column: |rho| between the column's ranks and the ranks of the
// integer-coded labels.
FeatureScores spearman_scores(const Eigen::MatrixXd& X,
                              const std::vector<int>& y);

// The k highest-scoring feature indices; ties at the cut go to lower index.
std::vector<int> select_top_k(const FeatureScores& scores, int k);

}  // namespace nilm
