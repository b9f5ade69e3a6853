#pragma once

#include "rankcpd/detector.hpp"

#include <optional>
#include <vector>

namespace rankcpd {

// True change locations; indices are strictly increasing.
struct GroundTruth {
    std::vector<int> change_points;
    int series_length = 0;
};

struct MatchCounts {
    int tp = 0;
    int fp = 0;
    int fn = 0;
};

struct EvalReport {
    std::optional<double> auc;
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    MatchCounts counts;
    int margin = 0;
};

// Greedy one-to-one matching: truths, in increasing order, claim the nearest
// unclaimed detection within +-margin; equidistant ties take the earlier one.
MatchCounts match_detections(const Detections& detections, const GroundTruth& truth,
                             int margin);

EvalReport f1_score(const Detections& detections, const GroundTruth& truth, int margin);

// Area under the TPR-vs-FPR curve traced by sweeping the peak threshold over
// every distinct trace value plus both infinities. FPR normalizes by the
// false-positive count at the loosest threshold (at least 1), and the curve
// is anchored at (0,0) and (1,1).
double cp_auc(const StatisticTrace& trace, const GroundTruth& truth, int margin,
              int delta);

}  // namespace rankcpd
