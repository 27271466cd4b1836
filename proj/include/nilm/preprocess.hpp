#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "nilm/signal_model.hpp"

namespace nilm {

inline constexpr double kDefaultFilterThresholdWatts = 300.0;
inline constexpr int kDefaultWindowLen = 6;
inline constexpr int kDefaultPaddedLen = 8;

// Fixed-length run of readings following a detected switch-on.
struct EventWindow {
  std::int64_t start_t = 0;
  Eigen::VectorXd readings;
};

// Frequency-domain magnitudes of one event window (padded_len/2 + 1 bins).
struct FeatureVector {
  Eigen::VectorXd magnitudes;
  std::int64_t source_start_t = 0;
};

// Zeroes every reading below the threshold; readings at or above it pass
// unchanged (the boundary is inclusive). Timestamps are preserved. Exact
// zeros are what the event detector uses as separators.
AggregateTrace highpass_filter(const AggregateTrace& trace,
                               double threshold_watts = kDefaultFilterThresholdWatts);

// Scans a filtered trace for switch-on edges. An event starts at the first
// nonzero reading following a zero (or the trace start); its window is the
// next window_len readings, zero-padded at the trace end. Nonzero runs
// shorter than window_len/2 readings are discarded as glitches and do not
// open a window. No event can start inside an open window.
std::vector<EventWindow> detect_events(const AggregateTrace& filtered,
                                       int window_len = kDefaultWindowLen);

// Zero-pads the window to padded_len (a power of two >= window length) and
// returns the magnitudes of the first padded_len/2 + 1 transform bins.
// No normalization happens at this stage.
Eigen::VectorXd fft_magnitudes(const Eigen::VectorXd& window, int padded_len);
FeatureVector fft_features(const EventWindow& window,
                           int padded_len = kDefaultPaddedLen);

struct MinMaxStats {
  Eigen::VectorXd col_min;
  Eigen::VectorXd col_max;
};

struct NormalizeResult {
  Eigen::MatrixXd normalized;
  MinMaxStats stats;
};

// Per-column (x - min) / (max - min). Constant columns map to zero. The
// returned stats reapply the identical affine map to unseen data.
NormalizeResult minmax_normalize(const Eigen::MatrixXd& features);

// Applies stored stats; out-of-range values clamp to [0, 1] so prediction
// inputs stay in the trained domain. On the training matrix this reproduces
// the normalized matrix exactly.
Eigen::MatrixXd apply_minmax(const Eigen::MatrixXd& features,
                             const MinMaxStats& stats);

// Row per corpus window, column per magnitude bin.
Eigen::MatrixXd feature_matrix(const WindowCorpus& corpus, int padded_len);

}  // namespace nilm
