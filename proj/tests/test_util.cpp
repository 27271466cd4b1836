#include <atomic>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "nilm/errors.hpp"
#include "nilm/fft.hpp"
#include "nilm/parallel.hpp"
#include "nilm/rng.hpp"
#include "nilm/timeutil.hpp"
#include "oracles.hpp"

using namespace nilm;

TEST_SUITE("fft") {
  TEST_CASE("matches the quadratic transform on random inputs") {
    Rng rng(101);
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t raw_len = 2 + rng.below(15);  // 2..16
      const std::size_t n = next_pow2(raw_len);
      std::vector<std::complex<double>> x(n, {0.0, 0.0});
      for (std::size_t i = 0; i < raw_len; ++i)
        x[i] = {rng.uniform(-100.0, 100.0), 0.0};
      const auto expected = oracle::dft(x);
      auto got = x;
      fft_radix2(got);
      for (std::size_t k = 0; k < n; ++k) {
        const double scale = std::max(1.0, std::abs(expected[k]));
        CHECK(std::abs(got[k] - expected[k]) / scale < 1e-9);
      }
    }
  }

  TEST_CASE("Parseval: time energy equals spectrum energy over n") {
    Rng rng(102);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = next_pow2(2 + rng.below(15));
      std::vector<std::complex<double>> x(n);
      double time_energy = 0.0;
      for (auto& v : x) {
        v = {rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0)};
        time_energy += std::norm(v);
      }
      fft_radix2(x);
      double freq_energy = 0.0;
      for (const auto& v : x) freq_energy += std::norm(v);
      CHECK(time_energy ==
            doctest::Approx(freq_energy / static_cast<double>(n))
                .epsilon(1e-6));
    }
  }

  TEST_CASE("linearity") {
    Rng rng(103);
    const std::size_t n = 16;
    std::vector<std::complex<double>> a(n), b(n), sum(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
      b[i] = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
      sum[i] = a[i] + 2.0 * b[i];
    }
    fft_radix2(a);
    fft_radix2(b);
    fft_radix2(sum);
    for (std::size_t k = 0; k < n; ++k)
      CHECK(std::abs(sum[k] - (a[k] + 2.0 * b[k])) < 1e-9);
  }

  TEST_CASE("constant signal concentrates into bin zero") {
    std::vector<std::complex<double>> x(8, {3.0, 0.0});
    fft_radix2(x);
    CHECK(x[0].real() == doctest::Approx(24.0));
    for (std::size_t k = 1; k < 8; ++k) CHECK(std::abs(x[k]) < 1e-12);
  }

  TEST_CASE("non-power-of-two size is rejected") {
    std::vector<std::complex<double>> x(6);
    CHECK_THROWS_AS(fft_radix2(x), std::invalid_argument);
  }

  TEST_CASE("pow2 helpers") {
    CHECK(is_pow2(1));
    CHECK(is_pow2(8));
    CHECK_FALSE(is_pow2(0));
    CHECK_FALSE(is_pow2(6));
    CHECK(next_pow2(5) == 8);
    CHECK(next_pow2(8) == 8);
    CHECK(next_pow2(1) == 1);
  }
}

TEST_SUITE("rng") {
  TEST_CASE("uniform01 stays in [0,1) and is seed-reproducible") {
    Rng a(7), b(7);
    for (int i = 0; i < 10000; ++i) {
      const double u = a.uniform01();
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
      CHECK(u == b.uniform01());
    }
  }

  TEST_CASE("derive_seed separates sibling streams") {
    const auto s1 = derive_seed(42, {1, 0});
    const auto s2 = derive_seed(42, {1, 1});
    const auto s3 = derive_seed(42, {2, 0});
    CHECK(s1 != s2);
    CHECK(s1 != s3);
    CHECK(s2 != s3);
    CHECK(derive_seed(42, {1, 0}) == s1);
  }

  TEST_CASE("shuffle is a permutation") {
    Rng rng(9);
    std::vector<int> v(100);
    std::iota(v.begin(), v.end(), 0);
    rng.shuffle(v);
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 100; ++i) CHECK(sorted[i] == i);
  }

  TEST_CASE("normal deviates have roughly the requested moments") {
    Rng rng(11);
    double sum = 0, sum2 = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const double x = rng.normal(5.0, 2.0);
      sum += x;
      sum2 += x * x;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(mean == doctest::Approx(5.0).epsilon(0.02));
    CHECK(var == doctest::Approx(4.0).epsilon(0.1));
  }
}

TEST_SUITE("timeutil") {
  TEST_CASE("iso8601 round trip") {
    Rng rng(13);
    for (int i = 0; i < 1000; ++i) {
      const std::int64_t t =
          static_cast<std::int64_t>(rng.below(4102444800ULL));  // to 2100
      CHECK(parse_iso8601(format_iso8601(t)) == t);
    }
    CHECK(format_iso8601(0) == "1970-01-01T00:00:00Z");
    CHECK(format_iso8601(1704067200) == "2024-01-01T00:00:00Z");
    CHECK(parse_iso8601("2024-02-29T12:30:45Z") ==
          epoch_from_civil(2024, 2, 29, 12, 30, 45));
  }

  TEST_CASE("malformed timestamps are rejected") {
    CHECK_THROWS_AS(parse_iso8601("2024-13-01T00:00:00Z"), DataError);
    CHECK_THROWS_AS(parse_iso8601("2024-01-01 00:00:00"), DataError);
    CHECK_THROWS_AS(parse_iso8601("not a time"), DataError);
    CHECK_THROWS_AS(parse_iso8601("2023-02-29T00:00:00Z"), DataError);
  }

  TEST_CASE("minute_of_day") {
    CHECK(minute_of_day(0) == doctest::Approx(0.0));
    CHECK(minute_of_day(3600) == doctest::Approx(60.0));
    CHECK(minute_of_day(86400 + 90) == doctest::Approx(1.5));
    CHECK(minute_of_day(-60) == doctest::Approx(1439.0));
  }
}

TEST_SUITE("parallel") {
  TEST_CASE("covers every index exactly once for any job count") {
    for (int jobs : {1, 2, 4, 9}) {
      std::vector<std::atomic<int>> hits(257);
      for (auto& h : hits) h = 0;
      parallel_for(jobs, 257, [&](int i) { hits[i]++; });
      for (auto& h : hits) CHECK(h == 1);
    }
  }

  TEST_CASE("propagates worker exceptions") {
    CHECK_THROWS_AS(parallel_for(4, 100,
                                 [](int i) {
                                   if (i == 57) throw DataError("boom");
                                 }),
                    DataError);
  }
}
