#include "nilm/signal_model.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "nilm/errors.hpp"
#include "nilm/rng.hpp"

namespace nilm {

namespace {
// stream tags for derive_seed
constexpr std::uint64_t kTagActivation = 0xac71;
constexpr std::uint64_t kTagNoise = 0x9015e;
constexpr std::uint64_t kTagHome = 0x803e;
constexpr std::uint64_t kTagSample = 0x5a3b1e;
}  // namespace

const char* to_string(ApplianceLabel label) {
  switch (label) {
    case ApplianceLabel::Kettle: return "Kettle";
    case ApplianceLabel::Toaster: return "Toaster";
    case ApplianceLabel::Microwave: return "Microwave";
    case ApplianceLabel::WashingMachine: return "WashingMachine";
    case ApplianceLabel::Cooker: return "Cooker";
  }
  return "?";
}

ApplianceLabel label_from_code(int code) {
  if (code < 0 || code >= kNumLabels)
    throw DataError("appliance label code out of range: " + std::to_string(code));
  return static_cast<ApplianceLabel>(code);
}

ApplianceLabel label_from_string(std::string_view s) {
  for (int c = 0; c < kNumLabels; ++c) {
    const auto label = static_cast<ApplianceLabel>(c);
    if (s == to_string(label)) return label;
  }
  throw DataError("unknown appliance label: " + std::string(s));
}

DeviceCategory category_for(ApplianceLabel label) {
  switch (label) {
    case ApplianceLabel::Kettle:
    case ApplianceLabel::Toaster:
      return DeviceCategory::Type1;
    default:
      return DeviceCategory::Type2;
  }
}

std::int64_t ApplianceSignature::duration_s() const {
  std::int64_t total = 0;
  for (const auto& st : states) total += st.duration_s;
  return total;
}

void validate_signature(const ApplianceSignature& sig) {
  if (sig.states.empty())
    throw std::invalid_argument("signature has no states");
  if (sig.jitter_fraction < 0.0 || sig.jitter_fraction > 0.5)
    throw std::invalid_argument("jitter_fraction outside [0, 0.5]");
  for (const auto& st : sig.states) {
    if (st.power_watts < 0.0)
      throw std::invalid_argument("state power must be non-negative");
    if (st.duration_s <= 0 || st.duration_s % kSampleIntervalS != 0)
      throw std::invalid_argument(
          "state duration must be a positive multiple of the sampling interval");
  }
  if (sig.category == DeviceCategory::Type1 && sig.states.size() != 1)
    throw std::invalid_argument("Type1 signature must have exactly one state");
  if (sig.states.front().power_watts < 300.0)
    throw std::invalid_argument(
        "first state must draw >= 300 W so the onset survives filtering");
}

ApplianceSignature scale_power(const ApplianceSignature& sig, double factor) {
  ApplianceSignature out = sig;
  for (auto& st : out.states) st.power_watts *= factor;
  return out;
}

const std::vector<ApplianceSignature>& default_signatures() {
  // Wattages are typical UK ratings; state runs are shaped so one activation
  // produces one detectable event and the first six readings carry a
  // class-specific profile.
  static const std::vector<ApplianceSignature> sigs = [] {
    std::vector<ApplianceSignature> v;
    v.push_back({ApplianceLabel::Kettle, DeviceCategory::Type1,
                 {{2800.0, 60}}, 0.05});
    v.push_back({ApplianceLabel::Toaster, DeviceCategory::Type1,
                 {{1000.0, 60}}, 0.05});
    v.push_back({ApplianceLabel::Microwave, DeviceCategory::Type2,
                 {{1200.0, 40}, {100.0, 10}, {1200.0, 30}}, 0.05});
    v.push_back({ApplianceLabel::WashingMachine, DeviceCategory::Type2,
                 {{2000.0, 40}, {400.0, 110}, {2200.0, 30}}, 0.05});
    v.push_back({ApplianceLabel::Cooker, DeviceCategory::Type2,
                 {{2500.0, 30}, {500.0, 30}, {2500.0, 30}, {500.0, 30},
                  {2500.0, 30}}, 0.05});
    for (const auto& s : v) validate_signature(s);
    return v;
  }();
  return sigs;
}

const ApplianceSignature& default_signature(ApplianceLabel label) {
  return default_signatures()[static_cast<std::size_t>(label)];
}

ComposeResult compose_aggregate(const std::vector<ScheduleEntry>& schedule,
                                std::int64_t duration_s,
                                double background_watts, double noise_sigma,
                                std::uint64_t seed,
                                std::int64_t start_epoch) {
  if (duration_s <= 0 || duration_s % kSampleIntervalS != 0)
    throw std::invalid_argument(
        "duration must be a positive multiple of the sampling interval");
  if (background_watts < 0.0)
    throw std::invalid_argument("background_watts must be >= 0");
  if (noise_sigma < 0.0)
    throw std::invalid_argument("noise_sigma must be >= 0");

  for (const auto& entry : schedule) {
    validate_signature(entry.signature);
    if (entry.start_t < 0 || entry.start_t % kSampleIntervalS != 0)
      throw std::invalid_argument(
          "schedule start_t must be a non-negative multiple of the sampling interval");
    if (entry.start_t + entry.signature.duration_s() > duration_s)
      throw std::invalid_argument("schedule entry runs past the trace end");
  }

  // One physical device cannot be on twice: same-label intervals must not
  // overlap.
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    for (std::size_t j = i + 1; j < schedule.size(); ++j) {
      if (schedule[i].signature.label != schedule[j].signature.label) continue;
      const std::int64_t a0 = schedule[i].start_t;
      const std::int64_t a1 = a0 + schedule[i].signature.duration_s();
      const std::int64_t b0 = schedule[j].start_t;
      const std::int64_t b1 = b0 + schedule[j].signature.duration_s();
      if (a0 < b1 && b0 < a1)
        throw std::invalid_argument(
            std::string("overlapping activations for ") +
            to_string(schedule[i].signature.label));
    }
  }

  const std::size_t n = static_cast<std::size_t>(duration_s / kSampleIntervalS);
  std::vector<double> watts(n, 0.0);

  // Background plus noise, clamped at zero before the appliances are added,
  // so readings stay non-negative for any noise_sigma.
  Rng noise(derive_seed(seed, {kTagNoise}));
  for (std::size_t i = 0; i < n; ++i) {
    double base = background_watts;
    if (noise_sigma > 0.0) base += noise.normal(0.0, noise_sigma);
    watts[i] = std::max(0.0, base);
  }

  GroundTruthLog truth;
  truth.reserve(schedule.size());
  for (const auto& entry : schedule) {
    const auto& sig = entry.signature;
    // Keyed on (label, start_t), not on position in the schedule: an entry's
    // contribution is independent of what else is scheduled.
    Rng jitter(derive_seed(seed, {kTagActivation,
                                  static_cast<std::uint64_t>(sig.label),
                                  static_cast<std::uint64_t>(entry.start_t)}));
    std::int64_t t = entry.start_t;
    for (const auto& st : sig.states) {
      const double factor =
          sig.jitter_fraction > 0.0
              ? jitter.uniform(1.0 - sig.jitter_fraction, 1.0 + sig.jitter_fraction)
              : 1.0;
      const double p = st.power_watts * factor;
      const std::size_t first = static_cast<std::size_t>(t / kSampleIntervalS);
      const std::size_t count = static_cast<std::size_t>(st.duration_s / kSampleIntervalS);
      for (std::size_t i = first; i < first + count; ++i) watts[i] += p;
      t += st.duration_s;
    }
    truth.push_back({sig.label, entry.start_t, entry.start_t + sig.duration_s()});
  }

  std::stable_sort(truth.begin(), truth.end(),
                   [](const GroundTruthEntry& a, const GroundTruthEntry& b) {
                     if (a.start_t != b.start_t) return a.start_t < b.start_t;
                     return static_cast<int>(a.label) < static_cast<int>(b.label);
                   });

  ComposeResult out;
  out.trace.start_epoch = start_epoch;
  out.trace.readings.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.trace.readings.push_back(
        {static_cast<std::int64_t>(i) * kSampleIntervalS, watts[i]});
  }
  out.truth = std::move(truth);
  return out;
}

WindowCorpus synth_dataset(const SynthParams& params) {
  if (params.homes < 1)
    throw std::invalid_argument("homes must be >= 1");
  if (params.samples_per_home_per_label < 1)
    throw std::invalid_argument("samples_per_home_per_label must be >= 1");
  if (params.window_len < 2)
    throw std::invalid_argument("window_len must be >= 2");

  WindowCorpus corpus;
  corpus.window_len = params.window_len;
  corpus.rows.reserve(static_cast<std::size_t>(kNumLabels) * params.homes *
                      params.samples_per_home_per_label);

  std::int64_t offset = 0;  // virtual timeline over the concatenated samples
  for (int code = 0; code < kNumLabels; ++code) {
    const auto label = static_cast<ApplianceLabel>(code);
    for (int home = 0; home < params.homes; ++home) {
      Rng home_rng(derive_seed(params.seed,
                               {kTagHome, static_cast<std::uint64_t>(home),
                                static_cast<std::uint64_t>(code)}));
      const double factor = params.home_jitter > 0.0
                                ? home_rng.uniform(1.0 - params.home_jitter,
                                                   1.0 + params.home_jitter)
                                : 1.0;
      const ApplianceSignature sig = scale_power(default_signature(label), factor);

      for (int s = 0; s < params.samples_per_home_per_label; ++s) {
        const std::uint64_t sample_seed =
            derive_seed(params.seed, {kTagSample, static_cast<std::uint64_t>(home),
                                      static_cast<std::uint64_t>(code),
                                      static_cast<std::uint64_t>(s)});
        const std::int64_t duration =
            std::max<std::int64_t>(sig.duration_s(),
                                   static_cast<std::int64_t>(params.window_len) *
                                       kSampleIntervalS);
        const ComposeResult r =
            compose_aggregate({{sig, 0}}, duration, params.background_watts,
                              params.noise_sigma, sample_seed);

        WindowRow row;
        row.label = label;
        row.source_start_t = offset;
        row.readings = Eigen::VectorXd::Zero(params.window_len);
        for (int i = 0; i < params.window_len; ++i) {
          const double w = r.trace.readings[static_cast<std::size_t>(i)].watts;
          row.readings[i] = w >= params.filter_threshold_watts ? w : 0.0;
        }
        corpus.rows.push_back(std::move(row));
        offset += duration;
      }
    }
  }
  return corpus;
}

}  // namespace nilm
