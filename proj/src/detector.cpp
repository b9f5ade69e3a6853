#include "rankcpd/detector.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

namespace rankcpd {

namespace {

void check_config(const DetectorConfig& config) {
    if (config.window < 1) {
        throw std::invalid_argument("scan: window must be positive");
    }
    if (config.stride < 1) {
        throw std::invalid_argument("scan: stride must be positive");
    }
    if (config.delta < 1) {
        throw std::invalid_argument("scan: delta must be positive");
    }
    if (config.epsilon < 0.0) {
        throw std::invalid_argument("scan: epsilon must be nonnegative");
    }
}

int resolve_threads(int requested) {
    if (requested > 0) {
        return requested;
    }
    if (const char* env = std::getenv("RANKCPD_THREADS")) {
        char* end = nullptr;
        const long parsed = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && parsed > 0) {
            return static_cast<int>(parsed);
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

double window_statistic(const Eigen::MatrixXd& left, const Eigen::MatrixXd& right,
                        const HaltonGrid& grid, const DetectorConfig& config) {
    TwoSample sample{left, right};
    StatisticValue stat;
    if (config.epsilon == 0.0) {
        stat = energy_statistic(hard_ranks(sample, grid));
    } else {
        SoftRankOptions options;
        options.sinkhorn = config.sinkhorn;
        options.normalize_cost = config.normalize_cost;
        stat = energy_statistic(soft_ranks(sample, grid, config.epsilon, options));
    }
    return config.use_scaled ? stat.scaled : stat.raw;
}

StatisticTrace scan(const TimeSeries& series, const DetectorConfig& config) {
    check_config(config);
    const int n = config.window;
    const int total = series.length();
    if (total < 2 * n) {
        throw std::invalid_argument("scan: series has " + std::to_string(total) +
                                    " rows, need at least " + std::to_string(2 * n) +
                                    "; zero_pad first");
    }
    if (!series.values.allFinite()) {
        throw std::invalid_argument("scan: series contains non-finite values");
    }

    StatisticTrace trace;
    trace.config = config;
    for (int t = n; t <= total - n; t += config.stride) {
        trace.times.push_back(t);
    }
    const int count = static_cast<int>(trace.times.size());
    trace.values.assign(count, 0.0);

    const HaltonGrid grid = generate_halton(2 * n, series.dim());

    auto evaluate = [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
            const int t = trace.times[static_cast<std::size_t>(i)];
            trace.values[static_cast<std::size_t>(i)] = window_statistic(
                series.values.middleRows(t - n, n), series.values.middleRows(t, n),
                grid, config);
        }
    };

    const int workers = std::min(resolve_threads(config.threads), std::max(count, 1));
    if (workers <= 1 || count <= 1) {
        evaluate(0, count);
        return trace;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const int chunk = (count + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const int begin = w * chunk;
        const int end = std::min(begin + chunk, count);
        if (begin >= end) {
            break;
        }
        pool.emplace_back(evaluate, begin, end);
    }
    for (auto& worker : pool) {
        worker.join();
    }
    return trace;
}

Detections detect_peaks(const StatisticTrace& trace, double eta, int delta) {
    if (delta < 1) {
        throw std::invalid_argument("detect_peaks: delta must be positive");
    }
    const auto& times = trace.times;
    const auto& values = trace.values;
    Detections out;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(values[i] > eta)) {
            continue;
        }
        bool peak = true;
        // Earlier neighbors win ties, later ones must be strictly larger.
        for (std::size_t j = i; j-- > 0 && times[i] - times[j] <= delta;) {
            if (values[j] >= values[i]) {
                peak = false;
                break;
            }
        }
        for (std::size_t j = i + 1; peak && j < times.size() && times[j] - times[i] <= delta; ++j) {
            if (values[j] > values[i]) {
                peak = false;
            }
        }
        if (peak) {
            out.change_points.push_back(times[i]);
        }
    }
    return out;
}

Detections detect_peaks(const StatisticTrace& trace) {
    return detect_peaks(trace, trace.config.eta, trace.config.delta);
}

TimeSeries zero_pad(const TimeSeries& series, int pad) {
    if (pad < 0) {
        throw std::invalid_argument("zero_pad: pad must be nonnegative");
    }
    TimeSeries padded;
    padded.values = Eigen::MatrixXd::Zero(series.length() + 2 * pad, series.dim());
    padded.values.middleRows(pad, series.length()) = series.values;
    return padded;
}

}  // namespace rankcpd
