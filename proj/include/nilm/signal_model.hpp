#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string_view>
#include <vector>

namespace nilm {

// Whole-home power is sampled every 10 seconds throughout the pipeline.
inline constexpr std::int64_t kSampleIntervalS = 10;

enum class ApplianceLabel : int {
  Kettle = 0,
  Toaster = 1,
  Microwave = 2,
  WashingMachine = 3,
  Cooker = 4,
};
inline constexpr int kNumLabels = 5;

const char* to_string(ApplianceLabel label);
ApplianceLabel label_from_code(int code);              // throws DataError
ApplianceLabel label_from_string(std::string_view s);  // throws DataError

// Type1: on/off. Type2: multi-state. Type3: continuously variable.
// Type4: always-on constant draw. Type3/Type4 only appear as background in
// the simulator; they carry no events.
enum class DeviceCategory { Type1, Type2, Type3, Type4 };

DeviceCategory category_for(ApplianceLabel label);

struct ApplianceState {
  double power_watts = 0.0;   // >= 0
  std::int64_t duration_s = kSampleIntervalS;  // > 0, multiple of 10
};

// Parametric power profile of one appliance: an ordered run of states played
// back per activation. jitter_fraction models activation-to-activation
// wattage spread (one uniform factor per state per activation).
struct ApplianceSignature {
  ApplianceLabel label = ApplianceLabel::Kettle;
  DeviceCategory category = DeviceCategory::Type1;
  std::vector<ApplianceState> states;
  double jitter_fraction = 0.0;  // in [0, 0.5]

  std::int64_t duration_s() const;
};

// Enforces: non-empty states, durations positive multiples of the sampling
// interval, jitter in [0, 0.5], Type1 has exactly one state, and the first
// state draws at least 300 W so the activation onset survives filtering.
void validate_signature(const ApplianceSignature& sig);

ApplianceSignature scale_power(const ApplianceSignature& sig, double factor);

// Nominal signatures for the five detectable classes (typical UK ratings).
const std::vector<ApplianceSignature>& default_signatures();
const ApplianceSignature& default_signature(ApplianceLabel label);

struct PowerReading {
  std::int64_t t = 0;   // seconds since trace start, multiple of 10
  double watts = 0.0;   // >= 0
};

struct AggregateTrace {
  std::int64_t start_epoch = 0;  // UTC seconds
  std::vector<PowerReading> readings;
};

struct GroundTruthEntry {
  ApplianceLabel label = ApplianceLabel::Kettle;
  std::int64_t start_t = 0;
  std::int64_t end_t = 0;  // exclusive, > start_t
};
using GroundTruthLog = std::vector<GroundTruthEntry>;

struct ScheduleEntry {
  ApplianceSignature signature;
  std::int64_t start_t = 0;
};

struct ComposeResult {
  AggregateTrace trace;
  GroundTruthLog truth;
};

// Sums the scheduled appliance profiles over a constant background plus
// Gaussian noise (the background+noise term is clamped at zero). Each state's
// power is perturbed once per activation by a uniform factor in
// [1-jitter, 1+jitter]; the per-activation stream is keyed on (label, start_t)
// so a schedule entry contributes identically regardless of the other entries.
// Same (schedule, seed) gives a bit-identical trace.
//
// Overlapping entries for the same label are rejected: one physical device
// cannot be on twice.
ComposeResult compose_aggregate(const std::vector<ScheduleEntry>& schedule,
                                std::int64_t duration_s,
                                double background_watts, double noise_sigma,
                                std::uint64_t seed,
                                std::int64_t start_epoch = 0);

struct SynthParams {
  int homes = 3;
  int samples_per_home_per_label = 25;
  int window_len = 6;  // readings per labeled sample, >= 2
  std::uint64_t seed = 42;
  double background_watts = 80.0;
  double noise_sigma = 30.0;
  double filter_threshold_watts = 300.0;
  // Per-home nominal wattage spread: each (home, label) scales its signature
  // by one uniform factor in [1-home_jitter, 1+home_jitter], modelling
  // manufacturer variance between properties.
  double home_jitter = 0.10;
};

struct WindowRow {
  ApplianceLabel label = ApplianceLabel::Kettle;
  std::int64_t source_start_t = 0;
  Eigen::VectorXd readings;  // length window_len, already filtered
};

struct WindowCorpus {
  int window_len = 6;
  std::vector<WindowRow> rows;
};

// Labeled event-window corpus: homes x samples windows per label, each the
// first window_len filtered readings of one simulated activation. Defaults
// give 75 windows and 450 readings per label, 2250 readings in total.
WindowCorpus synth_dataset(const SynthParams& params);

}  // namespace nilm
