#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "nilm/signal_model.hpp"

namespace nilm {

inline constexpr double kDefaultZThreshold = 3.0;

struct DetectionEvent {
  std::int64_t timestamp = 0;  // epoch seconds, UTC
  ApplianceLabel label = ApplianceLabel::Kettle;
  std::string device_id;
  double confidence = 1.0;  // [0,1]
};

// Half-open [start_minute, end_minute) in minutes from midnight; a window
// with start > end wraps past midnight.
struct ObservationWindow {
  std::string name;
  int start_minute = 0;
  int end_minute = 0;
};

// Seven windows covering the day: Overnight 23:00-05:00, EarlyMorning
// 05:00-08:00, Morning 08:00-11:00, Midday 11:00-14:00, Afternoon
// 14:00-17:00, Evening 17:00-20:00, Night 20:00-23:00.
std::vector<ObservationWindow> default_windows();

bool window_contains(const ObservationWindow& w, double minute);

// Every minute 0..1439 must fall in exactly one window; names must be
// distinct and non-empty. Throws std::invalid_argument otherwise.
void validate_windows(const std::vector<ObservationWindow>& windows);

// Index of the unique window containing the timestamp's minute of day.
int assign_window(std::int64_t timestamp,
                  const std::vector<ObservationWindow>& windows);

// Direction-free clock distance in minutes, always in [0, 720].
double circular_minute_distance(double a, double b);

struct CircularStats {
  long event_count = 0;
  double resultant = 0.0;       // R in [0,1]; 1 means perfectly regular
  double mean_minute = 0.0;     // [0,1440), meaningful when event_count > 0
  double stddev_minutes = 0.0;  // sqrt(-2 ln R) in minute units
};

// Mean direction and dispersion of minute-of-day angles.
CircularStats circular_stats(const std::vector<double>& minutes);

struct RoutineProfile {
  std::vector<ObservationWindow> windows;
  std::vector<std::vector<long>> counts;      // [label code][window index]
  std::vector<std::vector<long>> hour_flows;  // [label code][hour 0-23]
  std::array<CircularStats, kNumLabels> stats;
  long total = 0;
};

RoutineProfile build_routine(const std::vector<DetectionEvent>& events,
                             const std::vector<ObservationWindow>& windows);

struct SankeyFlow {
  ApplianceLabel label;
  int hour = 0;
  long weight = 0;
};

// One flow per nonzero (label, hour) tally, sorted by (label code, hour).
std::vector<SankeyFlow> sankey_flows(const RoutineProfile& profile);

struct ScoredEvent {
  DetectionEvent event;
  double z = 0.0;        // NaN when unscored
  bool flagged = false;  // flagged iff scored and |z| >= threshold
  bool scored = true;    // false when the baseline has < 2 events for label
};

struct AnomalyReport {
  double threshold = kDefaultZThreshold;
  std::vector<ScoredEvent> entries;  // input order preserved
};

// z = circular distance from the label's baseline mean, in baseline
// standard deviations. A zero-dispersion baseline gives z = +inf off-time
// and z = 0 at the exact mean.
AnomalyReport zscore_anomalies(const std::vector<DetectionEvent>& events,
                               const RoutineProfile& baseline,
                               double threshold = kDefaultZThreshold);

}  // namespace nilm
