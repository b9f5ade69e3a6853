#include "rankcpd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <set>
#include <stdexcept>
#include <utility>

namespace rankcpd {

MatchCounts match_detections(const Detections& detections, const GroundTruth& truth,
                             int margin) {
    if (margin < 1) {
        throw std::invalid_argument("match_detections: margin must be positive");
    }
    std::vector<int> found = detections.change_points;
    std::sort(found.begin(), found.end());

    MatchCounts counts;
    std::vector<char> claimed(found.size(), 0);
    for (const int tau : truth.change_points) {
        int best = -1;
        long best_dist = 0;
        for (std::size_t i = 0; i < found.size(); ++i) {
            if (claimed[i]) {
                continue;
            }
            const long dist = std::labs(static_cast<long>(found[i]) - tau);
            if (dist > margin) {
                continue;
            }
            // Strict < keeps the earlier detection on equidistant ties.
            if (best < 0 || dist < best_dist) {
                best = static_cast<int>(i);
                best_dist = dist;
            }
        }
        if (best >= 0) {
            claimed[static_cast<std::size_t>(best)] = 1;
            ++counts.tp;
        } else {
            ++counts.fn;
        }
    }
    counts.fp = static_cast<int>(found.size()) - counts.tp;
    return counts;
}

EvalReport f1_score(const Detections& detections, const GroundTruth& truth, int margin) {
    EvalReport report;
    report.margin = margin;
    report.counts = match_detections(detections, truth, margin);
    const auto& c = report.counts;
    report.precision = c.tp + c.fp > 0 ? static_cast<double>(c.tp) / (c.tp + c.fp) : 0.0;
    report.recall = c.tp + c.fn > 0 ? static_cast<double>(c.tp) / (c.tp + c.fn) : 0.0;
    const double denom = report.precision + report.recall;
    report.f1 = denom > 0.0 ? 2.0 * report.precision * report.recall / denom : 0.0;
    return report;
}

double cp_auc(const StatisticTrace& trace, const GroundTruth& truth, int margin,
              int delta) {
    if (trace.times.empty()) {
        throw std::invalid_argument("cp_auc: empty trace");
    }
    if (truth.change_points.empty()) {
        throw std::invalid_argument("cp_auc: no true change points to score against");
    }

    // Which times are delta-local maxima does not depend on the threshold,
    // so sweep by filtering one candidate set on value.
    const double neg_inf = -std::numeric_limits<double>::infinity();
    const Detections all_peaks = detect_peaks(trace, neg_inf, delta);
    std::vector<std::pair<int, double>> candidates;
    candidates.reserve(all_peaks.change_points.size());
    {
        std::size_t cursor = 0;
        for (const int t : all_peaks.change_points) {
            while (trace.times[cursor] != t) {
                ++cursor;
            }
            candidates.emplace_back(t, trace.values[cursor]);
        }
    }

    std::set<double, std::greater<double>> thresholds(trace.values.begin(),
                                                      trace.values.end());
    std::vector<double> etas(thresholds.begin(), thresholds.end());
    etas.push_back(neg_inf);

    const double positives = static_cast<double>(truth.change_points.size());
    std::vector<std::pair<double, double>> raw_points;
    int fp_loosest = 0;
    for (const double eta : etas) {
        Detections detections;
        for (const auto& [t, v] : candidates) {
            if (v > eta) {
                detections.change_points.push_back(t);
            }
        }
        const MatchCounts counts = match_detections(detections, truth, margin);
        raw_points.emplace_back(static_cast<double>(counts.fp),
                                static_cast<double>(counts.tp) / positives);
        fp_loosest = std::max(fp_loosest, counts.fp);
    }

    std::vector<std::pair<double, double>> points;
    points.emplace_back(0.0, 0.0);
    const double fp_scale = static_cast<double>(std::max(1, fp_loosest));
    for (const auto& [fp, tpr] : raw_points) {
        points.emplace_back(fp / fp_scale, tpr);
    }
    points.emplace_back(1.0, 1.0);
    std::sort(points.begin(), points.end());

    double area = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        const double width = points[i].first - points[i - 1].first;
        area += width * (points[i].second + points[i - 1].second) / 2.0;
    }
    return area;
}

}  // namespace rankcpd
