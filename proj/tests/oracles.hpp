#pragma once

// Reference implementations kept deliberately naive (quadratic loops, dense
// products, exhaustive scans) so their correctness is visible by inspection.
// The library must match these; the library code is never called from here.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <vector>

namespace oracle {

// O(n^2) forward discrete Fourier transform straight from the definition.
inline std::vector<std::complex<double>> dft(
    const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  const double two_pi = 2.0 * 3.14159265358979323846;
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      const double ang = -two_pi * static_cast<double>(k) *
                         static_cast<double>(t) / static_cast<double>(n);
      acc += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

// AUC as the fraction of (positive, negative) pairs ranked correctly,
// half credit for ties.
inline double pair_count_auc(const std::vector<double>& scores,
                             const std::vector<bool>& positive) {
  double won = 0.0;
  long pairs = 0;
  for (std::size_t p = 0; p < scores.size(); ++p) {
    if (!positive[p]) continue;
    for (std::size_t q = 0; q < scores.size(); ++q) {
      if (positive[q]) continue;
      ++pairs;
      if (scores[p] > scores[q])
        won += 1.0;
      else if (scores[p] == scores[q])
        won += 0.5;
    }
  }
  return won / static_cast<double>(pairs);
}

// AUC as the trapezoid area under the ROC curve swept over all distinct
// score thresholds, descending.
inline double trapezoid_auc(const std::vector<double>& scores,
                            const std::vector<bool>& positive) {
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  double total_p = 0, total_n = 0;
  for (bool b : positive) (b ? total_p : total_n) += 1.0;

  double area = 0.0, tp = 0.0, fp = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    double dtp = 0.0, dfp = 0.0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (positive[order[j]] ? dtp : dfp) += 1.0;
      ++j;
    }
    area += dfp / total_n * (tp + (tp + dtp)) / (2.0 * total_p);
    tp += dtp;
    fp += dfp;
    i = j;
  }
  (void)fp;
  return area;
}

struct Scatter {
  Eigen::MatrixXd within;
  Eigen::MatrixXd between;
};

// Scatter matrices by explicit double summation over elements.
inline Scatter scatter(const Eigen::MatrixXd& X, const std::vector<int>& y) {
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());
  std::vector<int> codes;
  for (int c : y)
    if (std::find(codes.begin(), codes.end(), c) == codes.end())
      codes.push_back(c);
  std::sort(codes.begin(), codes.end());
  const int num_classes = static_cast<int>(codes.size());

  std::vector<Eigen::VectorXd> mu(num_classes, Eigen::VectorXd::Zero(d));
  std::vector<int> count(num_classes, 0);
  Eigen::VectorXd grand = Eigen::VectorXd::Zero(d);
  for (int r = 0; r < n; ++r) {
    const int c = static_cast<int>(
        std::find(codes.begin(), codes.end(), y[r]) - codes.begin());
    for (int a = 0; a < d; ++a) mu[c][a] += X(r, a);
    count[c]++;
    for (int a = 0; a < d; ++a) grand[a] += X(r, a);
  }
  for (int c = 0; c < num_classes; ++c) mu[c] /= count[c];
  grand /= n;

  Scatter out;
  out.within = Eigen::MatrixXd::Zero(d, d);
  out.between = Eigen::MatrixXd::Zero(d, d);
  for (int r = 0; r < n; ++r) {
    const int c = static_cast<int>(
        std::find(codes.begin(), codes.end(), y[r]) - codes.begin());
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        out.within(a, b) += (X(r, a) - mu[c][a]) * (X(r, b) - mu[c][b]);
  }
  for (int c = 0; c < num_classes; ++c)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        out.between(a, b) += (mu[c][a] - grand[a]) * (mu[c][b] - grand[b]);
  out.between /= num_classes;
  return out;
}

// Average ranks by counting, rank_i = #smaller + (#equal + 1) / 2.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    int smaller = 0, equal = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) ++smaller;
      if (v[j] == v[i]) ++equal;
    }
    ranks[i] = smaller + (equal + 1) / 2.0;
  }
  return ranks;
}

// rho = 1 - 6 sum d^2 / (n (n^2 - 1)) on average ranks.
inline double spearman(const std::vector<double>& a,
                       const std::vector<double>& b) {
  const std::vector<double> ra = average_ranks(a);
  const std::vector<double> rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  double sum_d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    sum_d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
  return 1.0 - 6.0 * sum_d2 / (n * (n * n - 1.0));
}

struct Circular {
  double resultant = 0.0;
  double mean_minute = 0.0;
  double stddev_minutes = 0.0;
};

// Mean direction / resultant length / circular standard deviation of
// minute-of-day angles, straight from the trigonometric definitions.
inline Circular circular(const std::vector<double>& minutes) {
  const double two_pi = 2.0 * 3.14159265358979323846;
  double s = 0.0, c = 0.0;
  for (double m : minutes) {
    s += std::sin(m / 1440.0 * two_pi);
    c += std::cos(m / 1440.0 * two_pi);
  }
  const double n = static_cast<double>(minutes.size());
  Circular out;
  out.resultant = std::min(1.0, std::sqrt(s * s + c * c) / n);
  double ang = std::atan2(s, c);
  if (ang < 0) ang += two_pi;
  out.mean_minute = ang / two_pi * 1440.0;
  out.stddev_minutes =
      out.resultant == 0.0
          ? std::numeric_limits<double>::infinity()
          : std::sqrt(-2.0 * std::log(out.resultant)) * 1440.0 / two_pi;
  return out;
}

// True when every minute 0..1439 falls inside exactly one window,
// [start, end) with wrap when start > end.
struct MinuteWindow {
  int start = 0;
  int end = 0;
};
inline bool covers_day_once(const std::vector<MinuteWindow>& windows) {
  for (int m = 0; m < 1440; ++m) {
    int hits = 0;
    for (const MinuteWindow& w : windows) {
      const bool inside = w.start <= w.end ? (m >= w.start && m < w.end)
                                           : (m >= w.start || m < w.end);
      if (inside) ++hits;
    }
    if (hits != 1) return false;
  }
  return true;
}

// Dense congruence product P^T W P of the symmetric adjacency matrix with
// the 0/1 parent assignment matrix.
inline Eigen::MatrixXd coarse_adjacency(
    int num_vertices, const std::vector<std::array<double, 3>>& edges,
    const std::vector<int>& parent, int num_coarse) {
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(num_vertices, num_vertices);
  for (const auto& e : edges) {
    const int u = static_cast<int>(e[0]);
    const int v = static_cast<int>(e[1]);
    W(u, v) += e[2];
    W(v, u) += e[2];
  }
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(num_vertices, num_coarse);
  for (int i = 0; i < num_vertices; ++i) P(i, parent[i]) = 1.0;
  return P.transpose() * W * P;
}

// Exact all-pairs repulsion k/d^2 plus per-edge attraction -k*d*w, no
// spatial data structure.
inline Eigen::MatrixXd exact_forces(
    const Eigen::MatrixXd& coords,
    const std::vector<std::array<double, 3>>& edges, double k) {
  const int n = static_cast<int>(coords.rows());
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double dx = coords(i, 0) - coords(j, 0);
      const double dy = coords(i, 1) - coords(j, 1);
      const double d = std::sqrt(dx * dx + dy * dy);
      if (d == 0.0) continue;
      const double f = k / (d * d);
      F(i, 0) += f * dx / d;
      F(i, 1) += f * dy / d;
    }
  for (const auto& e : edges) {
    const int u = static_cast<int>(e[0]);
    const int v = static_cast<int>(e[1]);
    const double dx = coords(u, 0) - coords(v, 0);
    const double dy = coords(u, 1) - coords(v, 1);
    const double d = std::sqrt(dx * dx + dy * dy);
    if (d == 0.0) continue;
    const double f = k * d * e[2];
    F(u, 0) -= f * dx / d;
    F(u, 1) -= f * dy / d;
    F(v, 0) += f * dx / d;
    F(v, 1) += f * dy / d;
  }
  return F;
}

}  // namespace oracle
