#include "nilm/preprocess.hpp"

#include <complex>
#include <stdexcept>

#include "nilm/fft.hpp"

namespace nilm {

AggregateTrace highpass_filter(const AggregateTrace& trace,
                               double threshold_watts) {
  if (threshold_watts < 0.0)
    throw std::invalid_argument("threshold_watts must be >= 0");
  AggregateTrace out = trace;
  for (auto& r : out.readings) {
    if (r.watts < threshold_watts) r.watts = 0.0;
  }
  return out;
}

std::vector<EventWindow> detect_events(const AggregateTrace& filtered,
                                       int window_len) {
  if (window_len < 2)
    throw std::invalid_argument("window_len must be >= 2");

  const auto& r = filtered.readings;
  const std::size_t n = r.size();
  const std::size_t min_run = static_cast<std::size_t>(window_len / 2);

  std::vector<EventWindow> events;
  std::size_t i = 0;
  while (i < n) {
    const bool rising = r[i].watts != 0.0 && (i == 0 || r[i - 1].watts == 0.0);
    if (!rising) {
      ++i;
      continue;
    }
    // measure the nonzero run starting here
    std::size_t run = 0;
    while (i + run < n && r[i + run].watts != 0.0) ++run;
    if (run < min_run) {
      i += run;  // glitch: discard, does not open a window
      continue;
    }
    EventWindow ev;
    ev.start_t = r[i].t;
    ev.readings = Eigen::VectorXd::Zero(window_len);
    for (int j = 0; j < window_len; ++j) {
      if (i + static_cast<std::size_t>(j) < n)
        ev.readings[j] = r[i + static_cast<std::size_t>(j)].watts;
    }
    events.push_back(std::move(ev));
    i += static_cast<std::size_t>(window_len);  // window stays open
  }
  return events;
}

Eigen::VectorXd fft_magnitudes(const Eigen::VectorXd& window, int padded_len) {
  if (padded_len < window.size())
    throw std::invalid_argument("padded_len must be >= window length");
  if (!is_pow2(static_cast<std::size_t>(padded_len)))
    throw std::invalid_argument("padded_len must be a power of two");

  std::vector<std::complex<double>> buf(static_cast<std::size_t>(padded_len));
  for (Eigen::Index i = 0; i < window.size(); ++i)
    buf[static_cast<std::size_t>(i)] = std::complex<double>(window[i], 0.0);
  fft_radix2(buf);

  const int bins = padded_len / 2 + 1;
  Eigen::VectorXd mags(bins);
  for (int k = 0; k < bins; ++k) mags[k] = std::abs(buf[static_cast<std::size_t>(k)]);
  return mags;
}

FeatureVector fft_features(const EventWindow& window, int padded_len) {
  return {fft_magnitudes(window.readings, padded_len), window.start_t};
}

NormalizeResult minmax_normalize(const Eigen::MatrixXd& features) {
  if (features.rows() < 1)
    throw std::invalid_argument("minmax_normalize needs at least one row");
  NormalizeResult out;
  out.stats.col_min = features.colwise().minCoeff();
  out.stats.col_max = features.colwise().maxCoeff();
  out.normalized = apply_minmax(features, out.stats);
  return out;
}

Eigen::MatrixXd apply_minmax(const Eigen::MatrixXd& features,
                             const MinMaxStats& stats) {
  if (features.cols() != stats.col_min.size() ||
      features.cols() != stats.col_max.size())
    throw std::invalid_argument("min/max stats do not match feature width");

  Eigen::MatrixXd out(features.rows(), features.cols());
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    const double lo = stats.col_min[j];
    const double hi = stats.col_max[j];
    const double range = hi - lo;
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
      if (range == 0.0) {
        out(i, j) = 0.0;  // a constant feature carries no information
      } else {
        const double v = (features(i, j) - lo) / range;
        out(i, j) = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
      }
    }
  }
  return out;
}

Eigen::MatrixXd feature_matrix(const WindowCorpus& corpus, int padded_len) {
  const int bins = padded_len / 2 + 1;
  Eigen::MatrixXd X(static_cast<Eigen::Index>(corpus.rows.size()), bins);
  for (std::size_t i = 0; i < corpus.rows.size(); ++i) {
    X.row(static_cast<Eigen::Index>(i)) =
        fft_magnitudes(corpus.rows[i].readings, padded_len).transpose();
  }
  return X;
}

}  // namespace nilm
