#include <complex>
#include <vector>

#include <doctest.h>

#include "nilm/fft.hpp"
#include "nilm/preprocess.hpp"
#include "nilm/rng.hpp"
#include "nilm/signal_model.hpp"
#include "oracles.hpp"

using namespace nilm;

namespace {

AggregateTrace make_trace(const std::vector<double>& watts) {
  AggregateTrace trace;
  for (std::size_t i = 0; i < watts.size(); ++i)
    trace.readings.push_back(
        {static_cast<std::int64_t>(i) * kSampleIntervalS, watts[i]});
  return trace;
}

}  // namespace

TEST_SUITE("preprocess") {
  TEST_CASE("highpass zeroes below-threshold readings, boundary inclusive") {
    const AggregateTrace trace =
        make_trace({0, 100, 299.999, 300, 301, 2500, 50});
    const AggregateTrace filtered = highpass_filter(trace, 300);
    const std::vector<double> expected = {0, 0, 0, 300, 301, 2500, 0};
    REQUIRE(filtered.readings.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
      CHECK(filtered.readings[i].watts == expected[i]);
      CHECK(filtered.readings[i].t == trace.readings[i].t);
    }
  }

  TEST_CASE("highpass is idempotent") {
    Rng rng(21);
    std::vector<double> watts(500);
    for (double& w : watts) w = rng.uniform(0, 3000);
    const AggregateTrace once = highpass_filter(make_trace(watts));
    const AggregateTrace twice = highpass_filter(once);
    for (std::size_t i = 0; i < watts.size(); ++i)
      CHECK(once.readings[i].watts == twice.readings[i].watts);
  }

  TEST_CASE("detect_events finds onsets after zeros and at the start") {
    // 6-reading windows; kettle-like block at index 2 and another at 20
    std::vector<double> watts(30, 0.0);
    for (int i = 2; i < 8; ++i) watts[i] = 2000;
    for (int i = 20; i < 27; ++i) watts[i] = 1200;
    const auto events = detect_events(make_trace(watts), 6);
    REQUIRE(events.size() == 2);
    CHECK(events[0].start_t == 20);
    CHECK(events[1].start_t == 200);
    CHECK(events[0].readings.size() == 6);
    CHECK(events[0].readings[0] == 2000);
  }

  TEST_CASE("a nonzero run at the trace start opens an event") {
    std::vector<double> watts(10, 0.0);
    for (int i = 0; i < 6; ++i) watts[i] = 900;
    const auto events = detect_events(make_trace(watts), 6);
    REQUIRE(events.size() == 1);
    CHECK(events[0].start_t == 0);
  }

  TEST_CASE("short glitches are discarded") {
    // run of 2 < window_len/2 = 3 readings
    std::vector<double> watts(12, 0.0);
    watts[4] = 500;
    watts[5] = 500;
    CHECK(detect_events(make_trace(watts), 6).empty());
    // run of exactly 3 survives
    watts[6] = 500;
    CHECK(detect_events(make_trace(watts), 6).size() == 1);
  }

  TEST_CASE("windows at the trace end are zero padded") {
    std::vector<double> watts(8, 0.0);
    for (int i = 4; i < 8; ++i) watts[i] = 700;
    const auto events = detect_events(make_trace(watts), 6);
    REQUIRE(events.size() == 1);
    REQUIRE(events[0].readings.size() == 6);
    CHECK(events[0].readings[3] == 700);
    CHECK(events[0].readings[4] == 0);
    CHECK(events[0].readings[5] == 0);
  }

  TEST_CASE("no event can start inside an open window") {
    // dip to zero and re-rise within one window of the first onset
    std::vector<double> watts(20, 0.0);
    for (int i = 2; i < 5; ++i) watts[i] = 1000;
    for (int i = 6; i < 10; ++i) watts[i] = 800;  // still inside [2, 8)
    const auto events = detect_events(make_trace(watts), 6);
    REQUIRE(events.size() == 1);
    CHECK(events[0].start_t == 20);
  }

  TEST_CASE("fft_magnitudes matches the quadratic transform") {
    Rng rng(22);
    for (int trial = 0; trial < 1000; ++trial) {
      const int window_len = 2 + static_cast<int>(rng.below(15));  // 2..16
      const int padded = static_cast<int>(next_pow2(window_len));
      Eigen::VectorXd window(window_len);
      for (int i = 0; i < window_len; ++i) window[i] = rng.uniform(0, 3000);

      std::vector<std::complex<double>> padded_signal(padded, {0, 0});
      for (int i = 0; i < window_len; ++i) padded_signal[i] = {window[i], 0};
      const auto spectrum = oracle::dft(padded_signal);

      const Eigen::VectorXd mags = fft_magnitudes(window, padded);
      REQUIRE(mags.size() == padded / 2 + 1);
      for (int k = 0; k < mags.size(); ++k) {
        const double expected = std::abs(spectrum[k]);
        const double scale = std::max(1.0, expected);
        CHECK(std::abs(mags[k] - expected) / scale < 1e-9);
      }
    }
  }

  TEST_CASE("fft_features carries the window start and is non-negative") {
    EventWindow window;
    window.start_t = 1230;
    window.readings = Eigen::VectorXd::LinSpaced(6, 300, 800);
    const FeatureVector fv = fft_features(window, 8);
    CHECK(fv.source_start_t == 1230);
    CHECK(fv.magnitudes.size() == 5);
    CHECK(fv.magnitudes.minCoeff() >= 0.0);
  }

  TEST_CASE("padded_len must be a power of two covering the window") {
    Eigen::VectorXd window = Eigen::VectorXd::Ones(6);
    CHECK_THROWS_AS(fft_magnitudes(window, 6), std::invalid_argument);
    CHECK_THROWS_AS(fft_magnitudes(window, 4), std::invalid_argument);
  }

  TEST_CASE("minmax maps every column into [0,1] and stats reapply exactly") {
    Rng rng(23);
    Eigen::MatrixXd X(40, 5);
    for (int r = 0; r < X.rows(); ++r)
      for (int c = 0; c < X.cols(); ++c) X(r, c) = rng.uniform(-100, 100);
    X.col(3).setConstant(7.0);  // constant column maps to zero

    const NormalizeResult result = minmax_normalize(X);
    CHECK(result.normalized.minCoeff() >= 0.0);
    CHECK(result.normalized.maxCoeff() <= 1.0);
    CHECK((result.normalized.col(3).array() == 0.0).all());
    for (int c = 0; c < X.cols(); ++c) {
      CHECK(result.stats.col_min[c] == X.col(c).minCoeff());
      CHECK(result.stats.col_max[c] == X.col(c).maxCoeff());
    }

    const Eigen::MatrixXd reapplied = apply_minmax(X, result.stats);
    CHECK((reapplied.array() == result.normalized.array()).all());
  }

  TEST_CASE("apply_minmax clamps out-of-range values") {
    Eigen::MatrixXd X(2, 1);
    X << 0.0, 10.0;
    const MinMaxStats stats = minmax_normalize(X).stats;
    Eigen::MatrixXd fresh(3, 1);
    fresh << -5.0, 5.0, 20.0;
    const Eigen::MatrixXd mapped = apply_minmax(fresh, stats);
    CHECK(mapped(0, 0) == 0.0);
    CHECK(mapped(1, 0) == doctest::Approx(0.5));
    CHECK(mapped(2, 0) == 1.0);
  }

  TEST_CASE("feature_matrix has one row per window, one column per bin") {
    const WindowCorpus corpus = synth_dataset(SynthParams{});
    const Eigen::MatrixXd F = feature_matrix(corpus, 8);
    CHECK(F.rows() == static_cast<int>(corpus.rows.size()));
    CHECK(F.cols() == 5);
    CHECK(F.minCoeff() >= 0.0);

    // each row is the transform of its own window
    const Eigen::VectorXd first =
        fft_magnitudes(corpus.rows.front().readings, 8);
    CHECK((F.row(0).transpose() - first).cwiseAbs().maxCoeff() < 1e-12);
  }
}
