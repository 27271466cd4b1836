#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "nilm/classify.hpp"
#include "nilm/parallel.hpp"

namespace nilm {

double polynomial_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                         const SvmParams& params) {
  return std::pow(a.dot(b) + params.coef0, params.degree);
}

namespace {

// Two-coefficient dual decomposition with maximal-violating-pair selection.
// Gradient convention: G_i = sum_s y_i y_s K(i,s) alpha_s - 1, so the pair
//   m = max over up-candidates of -y_i G_i
//   M = min over down-candidates of -y_i G_i
// satisfies m <= M at optimality and the bias is (m + M) / 2.
BinarySvm solve_binary(const Eigen::MatrixXd& X, const std::vector<int>& sign,
                       const SvmParams& params) {
  const int n = static_cast<int>(X.rows());
  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      K(i, j) = K(j, i) = polynomial_kernel(X.row(i).transpose(),
                                            X.row(j).transpose(), params);

  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);
  const double C = params.C;

  double m = 0.0, M = 0.0;
  bool converged = false;
  for (long iter = 0; iter < params.max_iterations; ++iter) {
    int i = -1, j = -1;
    m = -std::numeric_limits<double>::infinity();
    M = std::numeric_limits<double>::infinity();
    for (int t = 0; t < n; ++t) {
      const double v = -sign[t] * grad[t];
      const bool can_up = sign[t] > 0 ? alpha[t] < C : alpha[t] > 0.0;
      const bool can_down = sign[t] > 0 ? alpha[t] > 0.0 : alpha[t] < C;
      if (can_up && v > m) {
        m = v;
        i = t;
      }
      if (can_down && v < M) {
        M = v;
        j = t;
      }
    }
    if (i < 0 || j < 0 || m - M <= params.kkt_tolerance) {
      converged = true;
      break;
    }

    // Move alpha_i by +y_i*t and alpha_j by -y_j*t along the equality
    // constraint; t* minimizes the quadratic restricted to the pair.
    double quad = K(i, i) + K(j, j) - 2.0 * K(i, j);
    if (quad <= 0.0) quad = 1e-12;
    double step = (m - M) / quad;
    const double cap_i = sign[i] > 0 ? C - alpha[i] : alpha[i];
    const double cap_j = sign[j] > 0 ? alpha[j] : C - alpha[j];
    step = std::min(step, std::min(cap_i, cap_j));

    alpha[i] += sign[i] * step;
    alpha[j] -= sign[j] * step;
    for (int t = 0; t < n; ++t)
      grad[t] += sign[t] * step * (K(t, i) - K(t, j));
  }

  BinarySvm out;
  out.converged = converged;
  if (std::isfinite(m) && std::isfinite(M)) {
    out.kkt_residual = std::max(0.0, m - M);
    out.bias = (m + M) / 2.0;
  } else {
    // one candidate set went empty: no violating pair exists
    out.kkt_residual = 0.0;
    out.bias = std::isfinite(m) ? m : (std::isfinite(M) ? M : 0.0);
  }

  int sv_count = 0;
  for (double a : alpha)
    if (a > 0.0) ++sv_count;
  out.support_vectors = Eigen::MatrixXd(sv_count, X.cols());
  out.coefficients = Eigen::VectorXd(sv_count);
  int k = 0;
  for (int t = 0; t < n; ++t) {
    if (alpha[t] <= 0.0) continue;
    out.support_vectors.row(k) = X.row(t);
    out.coefficients[k] = alpha[t] * sign[t];
    ++k;
  }
  return out;
}

}  // namespace

SvmOvaModel train_svm_ova(const Eigen::MatrixXd& X, const std::vector<int>& y,
                          const SvmParams& params, int jobs) {
  if (X.rows() == 0 || X.cols() == 0)
    throw std::invalid_argument("svm training needs a non-empty matrix");
  if (static_cast<int>(y.size()) != X.rows())
    throw std::invalid_argument("label count does not match row count");
  if (params.C <= 0.0 || params.degree < 1 || params.kkt_tolerance <= 0.0)
    throw std::invalid_argument("invalid svm parameters");

  SvmOvaModel model;
  model.params = params;
  model.num_features = static_cast<int>(X.cols());
  std::set<int> codes(y.begin(), y.end());
  if (codes.size() < 2)
    throw std::invalid_argument("svm one-vs-all needs at least two labels");
  model.class_codes.assign(codes.begin(), codes.end());

  const int C = static_cast<int>(model.class_codes.size());
  model.machines.resize(C);
  parallel_for(jobs, C, [&](int c) {
    std::vector<int> sign(y.size());
    for (size_t t = 0; t < y.size(); ++t)
      sign[t] = y[t] == model.class_codes[c] ? 1 : -1;
    model.machines[c] = solve_binary(X, sign, params);
  });
  return model;
}

double svm_decision_value(const BinarySvm& machine, const SvmParams& params,
                          const Eigen::VectorXd& x) {
  double d = machine.bias;
  for (int i = 0; i < machine.support_vectors.rows(); ++i)
    d += machine.coefficients[i] *
         polynomial_kernel(machine.support_vectors.row(i).transpose(), x,
                           params);
  return d;
}

Eigen::VectorXd svm_decision_values(const SvmOvaModel& model,
                                    const Eigen::VectorXd& x) {
  if (x.size() != model.num_features)
    throw std::invalid_argument("feature dimension mismatch");
  Eigen::VectorXd out(model.machines.size());
  for (size_t c = 0; c < model.machines.size(); ++c)
    out[c] = svm_decision_value(model.machines[c], model.params, x);
  return out;
}

int predict_svm_label(const SvmOvaModel& model, const Eigen::VectorXd& x) {
  Eigen::VectorXd d = svm_decision_values(model, x);
  int best = 0;
  for (int c = 1; c < d.size(); ++c)
    if (d[c] > d[best]) best = c;
  return model.class_codes[best];
}

}  // namespace nilm
