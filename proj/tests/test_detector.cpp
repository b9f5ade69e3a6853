#include "rankcpd/detector.hpp"

#include "support/test_util.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <vector>

using namespace rankcpd;

namespace {

StatisticTrace make_trace(std::vector<int> times, std::vector<double> values) {
    StatisticTrace trace;
    trace.times = std::move(times);
    trace.values = std::move(values);
    return trace;
}

TimeSeries shifted_halves(int half, int d, double shift, std::uint64_t seed) {
    TimeSeries series;
    series.values.resize(2 * half, d);
    series.values.topRows(half) = testutil::gaussian_points(half, d, mix64(seed, 0));
    series.values.bottomRows(half) =
        testutil::gaussian_points(half, d, mix64(seed, 1), shift);
    return series;
}

}  // namespace

TEST_CASE("a lone peak above the threshold is reported at its time") {
    const StatisticTrace trace = make_trace({0, 1, 2, 3, 4}, {0, 1, 3, 1, 0});
    CHECK(detect_peaks(trace, 2.0, 1).change_points == std::vector<int>{2});
    CHECK(detect_peaks(trace, 5.0, 1).change_points.empty());
    CHECK(detect_peaks(trace, 0.5, 1).change_points == std::vector<int>{2});
}

TEST_CASE("equal-valued plateaus keep only the earliest time") {
    const StatisticTrace trace = make_trace({0, 1, 2}, {3, 3, 3});
    CHECK(detect_peaks(trace, 1.0, 2).change_points == std::vector<int>{0});
    CHECK(detect_peaks(trace, 1.0, 1).change_points == std::vector<int>{0});
}

TEST_CASE("the threshold comparison is strict") {
    const StatisticTrace trace = make_trace({0, 1, 2}, {2, 2, 2});
    CHECK(detect_peaks(trace, 2.0, 1).change_points.empty());
}

TEST_CASE("nearby smaller peaks are suppressed within delta") {
    const StatisticTrace trace =
        make_trace({0, 1, 2, 3, 4, 5, 6}, {0, 5, 0, 4, 0, 6, 0});
    CHECK(detect_peaks(trace, 0.0, 2).change_points == std::vector<int>{1, 5});
    CHECK(detect_peaks(trace, 0.0, 1).change_points == std::vector<int>{1, 3, 5});
}

TEST_CASE("delta compares times, not indices") {
    const StatisticTrace trace = make_trace({0, 3, 6}, {1, 2, 1});
    CHECK(detect_peaks(trace, 0.0, 3).change_points == std::vector<int>{3});
    CHECK(detect_peaks(trace, 0.0, 2).change_points == std::vector<int>{0, 3, 6});
}

TEST_CASE("the config overload reads eta and delta from the trace") {
    StatisticTrace trace = make_trace({0, 1, 2, 3, 4}, {0, 1, 3, 1, 0});
    trace.config.eta = 2.0;
    trace.config.delta = 1;
    CHECK(detect_peaks(trace).change_points == std::vector<int>{2});
}

TEST_CASE("zero padding surrounds the series symmetrically") {
    TimeSeries series;
    series.values.resize(3, 2);
    series.values << 1, 2, 3, 4, 5, 6;
    const TimeSeries padded = zero_pad(series, 1);
    REQUIRE(padded.length() == 5);
    CHECK(padded.values.row(0).cwiseAbs().maxCoeff() == 0.0);
    CHECK(padded.values.row(4).cwiseAbs().maxCoeff() == 0.0);
    CHECK(padded.values.middleRows(1, 3).cwiseEqual(series.values).all());
    CHECK(zero_pad(series, 0).values.cwiseEqual(series.values).all());
    CHECK_THROWS_AS(zero_pad(series, -1), std::invalid_argument);
}

TEST_CASE("padding by the window covers every original time") {
    TimeSeries series;
    series.values = testutil::gaussian_points(12, 2, 64);
    const int n = 4;
    const TimeSeries padded = zero_pad(series, n);
    DetectorConfig config;
    config.window = n;
    const StatisticTrace trace = scan(padded, config);
    REQUIRE_FALSE(trace.times.empty());
    CHECK(trace.times.front() - n == 0);
    CHECK(trace.times.back() - n == series.length());
}

TEST_CASE("scan evaluates the arithmetic progression of centers") {
    TimeSeries series;
    series.values = testutil::gaussian_points(23, 2, 17);
    DetectorConfig config;
    config.window = 4;
    config.stride = 3;
    const StatisticTrace trace = scan(series, config);
    CHECK(trace.times == std::vector<int>{4, 7, 10, 13, 16, 19});
    CHECK(trace.values.size() == trace.times.size());
}

TEST_CASE("a constant series yields a flat trace") {
    TimeSeries series;
    series.values = Eigen::MatrixXd::Constant(20, 2, 3.25);
    DetectorConfig config;
    config.window = 5;
    const StatisticTrace trace = scan(series, config);
    for (const double value : trace.values) {
        CHECK(value == trace.values.front());
    }
}

TEST_CASE("scans are deterministic and independent of the thread count") {
    TimeSeries series;
    series.values = testutil::gaussian_points(60, 2, 23);
    DetectorConfig config;
    config.window = 10;
    config.stride = 5;
    config.epsilon = 1.0;

    config.threads = 1;
    const StatisticTrace single = scan(series, config);
    const StatisticTrace again = scan(series, config);
    CHECK(single.values == again.values);

    config.threads = 3;
    const StatisticTrace pooled = scan(series, config);
    CHECK(single.values == pooled.values);

    config.threads = 0;
    REQUIRE(setenv("RANKCPD_THREADS", "4", 1) == 0);
    const StatisticTrace from_env = scan(series, config);
    REQUIRE(unsetenv("RANKCPD_THREADS") == 0);
    CHECK(single.values == from_env.values);
    CHECK(single.times == from_env.times);
}

TEST_CASE("exact and smoothed scans agree with the statistic on each window") {
    TimeSeries series = shifted_halves(8, 2, 1.0, 5);
    for (const double eps : {0.0, 0.5}) {
        DetectorConfig config;
        config.window = 8;
        config.epsilon = eps;
        const StatisticTrace trace = scan(series, config);
        REQUIRE(trace.times == std::vector<int>{8});
        const HaltonGrid grid = generate_halton(16, 2);
        const double direct = window_statistic(series.values.topRows(8),
                                               series.values.bottomRows(8), grid, config);
        CHECK(trace.values[0] == direct);
    }
}

TEST_CASE("reported peaks really are local maxima above the threshold") {
    TimeSeries series;
    series.values = testutil::gaussian_points(80, 2, 31);
    series.values.middleRows(40, 20).array() += 2.0;
    DetectorConfig config;
    config.window = 10;
    config.delta = 5;
    const StatisticTrace trace = scan(series, config);

    std::vector<double> sorted = trace.values;
    std::sort(sorted.begin(), sorted.end());
    const double eta = sorted[sorted.size() / 2];
    const Detections detections = detect_peaks(trace, eta, config.delta);
    REQUIRE_FALSE(detections.change_points.empty());
    int previous = std::numeric_limits<int>::min();
    for (const int t : detections.change_points) {
        const auto it = std::find(trace.times.begin(), trace.times.end(), t);
        REQUIRE(it != trace.times.end());
        const auto i = static_cast<std::size_t>(it - trace.times.begin());
        CHECK(trace.values[i] > eta);
        for (std::size_t j = 0; j < trace.times.size(); ++j) {
            if (j != i && std::abs(trace.times[j] - t) <= config.delta) {
                CHECK(trace.values[j] <= trace.values[i]);
            }
        }
        if (previous != std::numeric_limits<int>::min()) {
            CHECK(t - previous > config.delta);
        }
        previous = t;
    }
}

TEST_CASE("larger mean shifts raise the scanned statistic") {
    DetectorConfig config;
    config.window = 30;
    double previous_mean = -1.0;
    for (const double shift : {0.5, 1.0, 2.0}) {
        double total = 0.0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const TimeSeries series = shifted_halves(30, 2, shift, 100 + seed);
            const StatisticTrace trace = scan(series, config);
            total += *std::max_element(trace.values.begin(), trace.values.end());
        }
        const double mean = total / 20.0;
        CHECK(mean > previous_mean);
        previous_mean = mean;
    }
}

TEST_CASE("scan rejects bad input") {
    TimeSeries series;
    series.values = testutil::gaussian_points(10, 2, 47);
    DetectorConfig config;
    config.window = 6;
    CHECK_THROWS_AS(scan(series, config), std::invalid_argument);

    config.window = 0;
    CHECK_THROWS_AS(scan(series, config), std::invalid_argument);
    config.window = 3;
    config.stride = 0;
    CHECK_THROWS_AS(scan(series, config), std::invalid_argument);
    config.stride = 1;
    config.delta = 0;
    CHECK_THROWS_AS(scan(series, config), std::invalid_argument);
    config.delta = 1;
    config.epsilon = -0.5;
    CHECK_THROWS_AS(scan(series, config), std::invalid_argument);

    config.epsilon = 0.0;
    TimeSeries tainted = series;
    tainted.values(4, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(scan(tainted, config), std::invalid_argument);

    CHECK_THROWS_AS(detect_peaks(make_trace({0}, {1.0}), 0.0, 0), std::invalid_argument);
}
