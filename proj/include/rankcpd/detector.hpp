#pragma once

#include "rankcpd/ranks.hpp"

#include <vector>

namespace rankcpd {

// Rows are time-ordered observations in R^d.
struct TimeSeries {
    Eigen::MatrixXd values;

    int length() const { return static_cast<int>(values.rows()); }
    int dim() const { return static_cast<int>(values.cols()); }
};

struct DetectorConfig {
    int window = 0;            // n: each of the two sliding samples holds n rows
    double epsilon = 0.0;      // 0 selects the exact rank statistic
    int delta = 1;             // peaks must dominate times within +-delta
    double eta = 0.0;          // detection threshold
    bool use_scaled = false;   // emit the mn/(m+n)-scaled statistic instead of raw
    int stride = 1;            // evaluate every stride-th center
    bool normalize_cost = false;
    SinkhornOptions sinkhorn = {5000, 1e-5, true, 1.8};
    int threads = 0;           // 0: RANKCPD_THREADS env var, else hardware count
};

// Statistic values at the evaluated centers; times is strictly increasing.
struct StatisticTrace {
    std::vector<int> times;
    std::vector<double> values;
    DetectorConfig config;
};

struct Detections {
    std::vector<int> change_points;
};

// Statistic for one window pair against a fixed grid, per config.epsilon.
double window_statistic(const Eigen::MatrixXd& left, const Eigen::MatrixXd& right,
                        const HaltonGrid& grid, const DetectorConfig& config);

// Slides paired windows X = rows [t-n, t) and Y = rows [t, t+n) for
// t = n, n+stride, ... <= length-n, ranking each pair against one shared
// grid of 2n points. Windows are solved independently, so the trace does
// not depend on the thread count.
StatisticTrace scan(const TimeSeries& series, const DetectorConfig& config);

// Times whose value exceeds eta and is the neighborhood maximum over
// evaluated times within +-delta; equal-valued neighbors keep the earliest.
Detections detect_peaks(const StatisticTrace& trace, double eta, int delta);
Detections detect_peaks(const StatisticTrace& trace);  // uses trace.config

// Prepends and appends pad zero rows; detections on the padded series sit
// pad steps later than in the original.
TimeSeries zero_pad(const TimeSeries& series, int pad);

}  // namespace rankcpd
