#include "nilm/behaviour.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "nilm/timeutil.hpp"

namespace nilm {

namespace {
constexpr double kMinutesPerDay = 1440.0;
constexpr double kTwoPi = 6.283185307179586476925286766559;
}  // namespace

std::vector<ObservationWindow> default_windows() {
  return {
      {"Overnight", 23 * 60, 5 * 60}, {"EarlyMorning", 5 * 60, 8 * 60},
      {"Morning", 8 * 60, 11 * 60},   {"Midday", 11 * 60, 14 * 60},
      {"Afternoon", 14 * 60, 17 * 60}, {"Evening", 17 * 60, 20 * 60},
      {"Night", 20 * 60, 23 * 60},
  };
}

bool window_contains(const ObservationWindow& w, double minute) {
  if (w.start_minute < w.end_minute)
    return minute >= w.start_minute && minute < w.end_minute;
  // wraps midnight (start == end covers the whole day)
  return minute >= w.start_minute || minute < w.end_minute;
}

void validate_windows(const std::vector<ObservationWindow>& windows) {
  if (windows.empty())
    throw std::invalid_argument("observation window set is empty");
  std::set<std::string> names;
  for (const ObservationWindow& w : windows) {
    if (w.name.empty())
      throw std::invalid_argument("observation window with empty name");
    if (!names.insert(w.name).second)
      throw std::invalid_argument("duplicate observation window: " + w.name);
    if (w.start_minute < 0 || w.start_minute >= 1440 || w.end_minute < 0 ||
        w.end_minute >= 1440)
      throw std::invalid_argument("window minutes outside 0..1439: " + w.name);
  }
  for (int minute = 0; minute < 1440; ++minute) {
    int hits = 0;
    for (const ObservationWindow& w : windows)
      if (window_contains(w, minute)) ++hits;
    if (hits != 1)
      throw std::invalid_argument(
          "minute " + std::to_string(minute) + " covered by " +
          std::to_string(hits) + " windows; need exactly 1");
  }
}

int assign_window(std::int64_t timestamp,
                  const std::vector<ObservationWindow>& windows) {
  const double minute = minute_of_day(timestamp);
  for (size_t i = 0; i < windows.size(); ++i)
    if (window_contains(windows[i], minute)) return static_cast<int>(i);
  throw std::invalid_argument("no observation window covers minute " +
                              std::to_string(minute));
}

double circular_minute_distance(double a, double b) {
  double d = std::fabs(std::fmod(a - b, kMinutesPerDay));
  return std::min(d, kMinutesPerDay - d);
}

CircularStats circular_stats(const std::vector<double>& minutes) {
  CircularStats out;
  out.event_count = static_cast<long>(minutes.size());
  if (minutes.empty()) return out;
  double c = 0.0, s = 0.0;
  for (double m : minutes) {
    const double theta = kTwoPi * m / kMinutesPerDay;
    c += std::cos(theta);
    s += std::sin(theta);
  }
  c /= minutes.size();
  s /= minutes.size();
  out.resultant = std::min(1.0, std::hypot(c, s));
  double mean_theta = std::atan2(s, c);
  if (mean_theta < 0) mean_theta += kTwoPi;
  out.mean_minute = std::fmod(mean_theta * kMinutesPerDay / kTwoPi,
                              kMinutesPerDay);
  out.stddev_minutes = out.resultant <= 0.0
                           ? std::numeric_limits<double>::infinity()
                           : std::sqrt(-2.0 * std::log(out.resultant)) *
                                 kMinutesPerDay / kTwoPi;
  return out;
}

RoutineProfile build_routine(const std::vector<DetectionEvent>& events,
                             const std::vector<ObservationWindow>& windows) {
  validate_windows(windows);
  RoutineProfile profile;
  profile.windows = windows;
  profile.counts.assign(kNumLabels, std::vector<long>(windows.size(), 0));
  profile.hour_flows.assign(kNumLabels, std::vector<long>(24, 0));

  std::array<std::vector<double>, kNumLabels> minutes_by_label;
  for (const DetectionEvent& e : events) {
    const int code = static_cast<int>(e.label);
    const double minute = minute_of_day(e.timestamp);
    profile.counts[code][assign_window(e.timestamp, windows)] += 1;
    profile.hour_flows[code][static_cast<int>(minute / 60.0) % 24] += 1;
    minutes_by_label[code].push_back(minute);
    profile.total += 1;
  }
  for (int code = 0; code < kNumLabels; ++code)
    profile.stats[code] = circular_stats(minutes_by_label[code]);
  return profile;
}

std::vector<SankeyFlow> sankey_flows(const RoutineProfile& profile) {
  std::vector<SankeyFlow> flows;
  for (int code = 0; code < kNumLabels; ++code)
    for (int hour = 0; hour < 24; ++hour)
      if (profile.hour_flows[code][hour] > 0)
        flows.push_back({label_from_code(code), hour,
                         profile.hour_flows[code][hour]});
  return flows;
}

AnomalyReport zscore_anomalies(const std::vector<DetectionEvent>& events,
                               const RoutineProfile& baseline,
                               double threshold) {
  if (threshold < 0)
    throw std::invalid_argument("anomaly threshold must be non-negative");
  AnomalyReport report;
  report.threshold = threshold;
  report.entries.reserve(events.size());
  for (const DetectionEvent& e : events) {
    ScoredEvent scored;
    scored.event = e;
    const CircularStats& stats = baseline.stats[static_cast<int>(e.label)];
    if (stats.event_count < 2) {
      scored.z = std::numeric_limits<double>::quiet_NaN();
      scored.scored = false;
      scored.flagged = false;
    } else {
      const double deviation = circular_minute_distance(
          minute_of_day(e.timestamp), stats.mean_minute);
      if (stats.stddev_minutes == 0.0)
        scored.z = deviation == 0.0
                       ? 0.0
                       : std::numeric_limits<double>::infinity();
      else
        scored.z = deviation / stats.stddev_minutes;
      scored.flagged = std::fabs(scored.z) >= threshold;
    }
    report.entries.push_back(std::move(scored));
  }
  return report;
}

}  // namespace nilm
