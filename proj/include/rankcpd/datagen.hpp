#pragma once

#include "rankcpd/detector.hpp"
#include "rankcpd/metrics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rankcpd {

// One homogeneous segment: i.i.d. N(mean, covariance_scale * I) rows, or
// exact zeros for quiet padding segments.
struct SegmentSpec {
    enum class Kind { Gaussian, Zeros };

    Kind kind = Kind::Gaussian;
    int length = 0;
    Eigen::VectorXd mean;
    double covariance_scale = 1.0;

    static SegmentSpec zeros(int length, int dim);
    static SegmentSpec gaussian(int length, Eigen::VectorXd mean, double covariance_scale);
};

struct LabeledSeries {
    TimeSeries series;
    GroundTruth truth;
    std::uint64_t seed = 0;
};

// Concatenates the segments; truth marks the first index of each segment
// after the first. Each segment draws from its own seed stream, so prefixes
// of a spec list reproduce exactly.
LabeledSeries generate_segments(const std::vector<SegmentSpec>& specs, std::uint64_t seed);

// Seven segments of the given length in R^3: zeros, then five Gaussian
// regimes alternating mean and spread, then zeros again.
LabeledSeries fig1_preset(int segment_length, std::uint64_t seed);

// Comma-separated doubles, one row per line; blank lines are skipped.
TimeSeries load_csv(const std::string& path, bool has_header);
void write_csv(const TimeSeries& series, const std::string& path);

// Newline-separated nonnegative integer change locations.
GroundTruth load_labels(const std::string& path);
void write_labels(const GroundTruth& truth, const std::string& path);

}  // namespace rankcpd
