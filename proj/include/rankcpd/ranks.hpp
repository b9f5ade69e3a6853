#pragma once

#include "rankcpd/halton.hpp"
#include "rankcpd/ot.hpp"

#include <Eigen/Dense>

namespace rankcpd {

// Two multivariate samples sharing one dimension; rows are observations.
struct TwoSample {
    Eigen::MatrixXd xs;  // m x d
    Eigen::MatrixXd ys;  // n x d

    int m() const { return static_cast<int>(xs.rows()); }
    int n() const { return static_cast<int>(ys.rows()); }
    int dim() const { return static_cast<int>(xs.cols()); }
};

enum class RankKind { Hard, Soft };
enum class StatisticKind { RankEnergy, SoftRankEnergy };

// Per-sample rank vectors in the unit cube. Hard ranks are grid points (the
// m+n of them form a permutation of the grid); soft ranks are convex
// combinations of grid points.
struct RankSet {
    Eigen::MatrixXd x_ranks;  // m x d
    Eigen::MatrixXd y_ranks;  // n x d
    RankKind kind = RankKind::Hard;
    double epsilon = 0.0;  // 0 for hard ranks
};

struct StatisticValue {
    double raw = 0.0;     // energy distance between the two rank sets
    double scaled = 0.0;  // raw * mn/(m+n)
    StatisticKind kind = StatisticKind::RankEnergy;
    double epsilon = 0.0;
};

struct SoftRankOptions {
    SinkhornOptions sinkhorn;
    bool normalize_cost = false;  // divide costs by their max before solving
};

// Pools xs then ys, transports the pooled points onto the grid exactly, and
// reads each point's rank off the assigned grid row. grid.count must equal
// m + n and grid.dim must equal d.
RankSet hard_ranks(const TwoSample& sample, const HaltonGrid& grid);

// Soft ranks: expected grid point under each row of the row-normalized
// entropic plan.
RankSet soft_ranks(const TwoSample& sample, const HaltonGrid& grid, double epsilon,
                   const SoftRankOptions& options = {});

// Energy distance of the two rank sets; self-pairs contribute zero and are
// included as written:
//   raw = 2/(mn) sum ||Rx_i - Ry_j|| - 1/m^2 sum ||Rx_i - Rx_j||
//                                    - 1/n^2 sum ||Ry_i - Ry_j||
StatisticValue energy_statistic(const RankSet& ranks);

// Grid of size m+n, hard ranks, energy statistic.
StatisticValue rank_energy(const TwoSample& sample);

// Grid of size m+n, soft ranks at the given epsilon, energy statistic.
StatisticValue soft_rank_energy(const TwoSample& sample, double epsilon,
                                const SoftRankOptions& options = {});

}  // namespace rankcpd
