#include <vector>

#include <doctest.h>

#include "nilm/errors.hpp"
#include "nilm/signal_model.hpp"

using namespace nilm;

namespace {

std::vector<ScheduleEntry> one_kettle(std::int64_t start) {
  return {{default_signature(ApplianceLabel::Kettle), start}};
}

}  // namespace

TEST_SUITE("signal_model") {
  TEST_CASE("label round trips") {
    for (int code = 0; code < kNumLabels; ++code) {
      const ApplianceLabel label = label_from_code(code);
      CHECK(static_cast<int>(label) == code);
      CHECK(label_from_string(to_string(label)) == label);
    }
    CHECK_THROWS_AS(label_from_code(5), DataError);
    CHECK_THROWS_AS(label_from_code(-1), DataError);
    CHECK_THROWS_AS(label_from_string("Fridge"), DataError);
  }

  TEST_CASE("default signatures validate and start above the filter") {
    for (const ApplianceSignature& sig : default_signatures()) {
      CHECK_NOTHROW(validate_signature(sig));
      CHECK(sig.states.front().power_watts >= 300.0);
      if (sig.category == DeviceCategory::Type1)
        CHECK(sig.states.size() == 1);
      else
        CHECK(sig.states.size() > 1);
    }
    CHECK(default_signatures().size() == kNumLabels);
  }

  TEST_CASE("signature validation rejects malformed profiles") {
    ApplianceSignature sig = default_signature(ApplianceLabel::Kettle);
    sig.states.clear();
    CHECK_THROWS_AS(validate_signature(sig), std::invalid_argument);

    sig = default_signature(ApplianceLabel::Kettle);
    sig.jitter_fraction = 0.6;
    CHECK_THROWS_AS(validate_signature(sig), std::invalid_argument);

    sig = default_signature(ApplianceLabel::Kettle);
    sig.states[0].duration_s = 15;  // not a sample multiple
    CHECK_THROWS_AS(validate_signature(sig), std::invalid_argument);
  }

  TEST_CASE("scale_power scales every state") {
    const ApplianceSignature base = default_signature(ApplianceLabel::Cooker);
    const ApplianceSignature scaled = scale_power(base, 1.5);
    REQUIRE(scaled.states.size() == base.states.size());
    for (std::size_t i = 0; i < base.states.size(); ++i) {
      CHECK(scaled.states[i].power_watts ==
            doctest::Approx(base.states[i].power_watts * 1.5));
      CHECK(scaled.states[i].duration_s == base.states[i].duration_s);
    }
  }

  TEST_CASE("compose is deterministic in (schedule, seed)") {
    const auto schedule = one_kettle(600);
    const ComposeResult a = compose_aggregate(schedule, 3600, 80, 30, 5);
    const ComposeResult b = compose_aggregate(schedule, 3600, 80, 30, 5);
    const ComposeResult c = compose_aggregate(schedule, 3600, 80, 30, 6);
    REQUIRE(a.trace.readings.size() == b.trace.readings.size());
    bool all_equal = true, any_diff_seed = false;
    for (std::size_t i = 0; i < a.trace.readings.size(); ++i) {
      all_equal &= a.trace.readings[i].watts == b.trace.readings[i].watts;
      any_diff_seed |= a.trace.readings[i].watts != c.trace.readings[i].watts;
    }
    CHECK(all_equal);
    CHECK(any_diff_seed);
  }

  TEST_CASE("noise-free compose is the exact superposition") {
    std::vector<ScheduleEntry> schedule = {
        {default_signature(ApplianceLabel::Kettle), 100},
        {default_signature(ApplianceLabel::Toaster), 120},
    };
    const ComposeResult both = compose_aggregate(schedule, 600, 50, 0, 1);
    const ComposeResult kettle =
        compose_aggregate({schedule[0]}, 600, 0, 0, 1);
    const ComposeResult toaster =
        compose_aggregate({schedule[1]}, 600, 0, 0, 1);
    REQUIRE(both.trace.readings.size() == 60);
    for (std::size_t i = 0; i < both.trace.readings.size(); ++i) {
      const double expected = 50.0 + kettle.trace.readings[i].watts +
                              toaster.trace.readings[i].watts;
      CHECK(both.trace.readings[i].watts == doctest::Approx(expected));
    }
  }

  TEST_CASE("an entry contributes the same watts regardless of neighbours") {
    const ApplianceSignature sig = default_signature(ApplianceLabel::Kettle);
    const ComposeResult alone = compose_aggregate({{sig, 300}}, 1200, 0, 0, 9);
    std::vector<ScheduleEntry> crowd = {
        {sig, 300}, {default_signature(ApplianceLabel::Microwave), 700}};
    const ComposeResult crowded = compose_aggregate(crowd, 1200, 0, 0, 9);
    const ComposeResult mw_alone =
        compose_aggregate({crowd[1]}, 1200, 0, 0, 9);
    for (std::size_t i = 0; i < alone.trace.readings.size(); ++i)
      CHECK(crowded.trace.readings[i].watts ==
            doctest::Approx(alone.trace.readings[i].watts +
                            mw_alone.trace.readings[i].watts));
  }

  TEST_CASE("readings are non-negative even under heavy noise") {
    const ComposeResult r = compose_aggregate({}, 86400, 10, 500, 3);
    for (const PowerReading& reading : r.trace.readings)
      CHECK(reading.watts >= 0.0);
  }

  TEST_CASE("timestamps are contiguous multiples of the interval") {
    const ComposeResult r = compose_aggregate(one_kettle(0), 3600, 80, 30, 4);
    REQUIRE(r.trace.readings.size() == 360);
    for (std::size_t i = 0; i < r.trace.readings.size(); ++i)
      CHECK(r.trace.readings[i].t ==
            static_cast<std::int64_t>(i) * kSampleIntervalS);
  }

  TEST_CASE("truth log matches the schedule") {
    const auto schedule = one_kettle(600);
    const ComposeResult r = compose_aggregate(schedule, 3600, 80, 30, 4);
    REQUIRE(r.truth.size() == 1);
    CHECK(r.truth[0].label == ApplianceLabel::Kettle);
    CHECK(r.truth[0].start_t == 600);
    CHECK(r.truth[0].end_t == 600 + schedule[0].signature.duration_s());
  }

  TEST_CASE("overlapping activations of one label are rejected") {
    std::vector<ScheduleEntry> schedule = {
        {default_signature(ApplianceLabel::Kettle), 0},
        {default_signature(ApplianceLabel::Kettle), 30},
    };
    CHECK_THROWS_AS(compose_aggregate(schedule, 3600, 80, 30, 4),
                    std::invalid_argument);
  }

  TEST_CASE("an entry running past the trace end is rejected") {
    CHECK_THROWS_AS(compose_aggregate(one_kettle(3590), 3600, 80, 30, 4),
                    std::invalid_argument);
  }

  TEST_CASE("default dataset shape: 75 windows and 450 readings per label") {
    const WindowCorpus corpus = synth_dataset(SynthParams{});
    REQUIRE(corpus.window_len == 6);
    std::vector<int> per_label(kNumLabels, 0);
    long readings = 0;
    for (const WindowRow& row : corpus.rows) {
      per_label[static_cast<int>(row.label)]++;
      readings += row.readings.size();
      CHECK(row.readings.size() == 6);
      CHECK(row.readings.minCoeff() >= 0.0);
    }
    for (int code = 0; code < kNumLabels; ++code) CHECK(per_label[code] == 75);
    CHECK(corpus.rows.size() == 375);
    CHECK(readings == 2250);
  }

  TEST_CASE("tiny dataset: one home, one sample, five windows") {
    SynthParams params;
    params.homes = 1;
    params.samples_per_home_per_label = 1;
    const WindowCorpus corpus = synth_dataset(params);
    CHECK(corpus.rows.size() == 5);
  }

  TEST_CASE("dataset is seed-deterministic") {
    const WindowCorpus a = synth_dataset(SynthParams{});
    const WindowCorpus b = synth_dataset(SynthParams{});
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      CHECK(a.rows[i].label == b.rows[i].label);
      CHECK(a.rows[i].source_start_t == b.rows[i].source_start_t);
      CHECK((a.rows[i].readings.array() == b.rows[i].readings.array()).all());
    }
  }

  TEST_CASE("first window reading clears the filter threshold") {
    const WindowCorpus corpus = synth_dataset(SynthParams{});
    for (const WindowRow& row : corpus.rows)
      CHECK(row.readings[0] >= 300.0);
  }
}
