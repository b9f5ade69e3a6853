#include "rankcpd/ranks.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace rankcpd {

namespace {

void check_sample(const TwoSample& sample) {
    if (sample.m() < 1 || sample.n() < 1) {
        throw std::invalid_argument("ranks: both samples must be nonempty");
    }
    if (sample.xs.cols() != sample.ys.cols()) {
        throw std::invalid_argument("ranks: samples have mismatched dimensions");
    }
}

void check_grid(const TwoSample& sample, const HaltonGrid& grid) {
    if (grid.count() != sample.m() + sample.n()) {
        throw std::invalid_argument("ranks: grid size must equal m + n");
    }
    if (grid.dim() != sample.dim()) {
        throw std::invalid_argument("ranks: grid dimension must equal sample dimension");
    }
}

Eigen::MatrixXd pool(const TwoSample& sample) {
    Eigen::MatrixXd pooled(sample.m() + sample.n(), sample.dim());
    pooled.topRows(sample.m()) = sample.xs;
    pooled.bottomRows(sample.n()) = sample.ys;
    return pooled;
}

}  // namespace

RankSet hard_ranks(const TwoSample& sample, const HaltonGrid& grid) {
    check_sample(sample);
    check_grid(sample, grid);

    const Eigen::MatrixXd pooled = pool(sample);
    const CostMatrix cost = cost_matrix(pooled, grid);
    const std::vector<int> assignment = solve_assignment(cost.entries);

    RankSet ranks;
    ranks.kind = RankKind::Hard;
    ranks.epsilon = 0.0;
    ranks.x_ranks.resize(sample.m(), sample.dim());
    ranks.y_ranks.resize(sample.n(), sample.dim());
    for (int i = 0; i < sample.m(); ++i) {
        ranks.x_ranks.row(i) = grid.points.row(assignment[i]);
    }
    for (int j = 0; j < sample.n(); ++j) {
        ranks.y_ranks.row(j) = grid.points.row(assignment[sample.m() + j]);
    }
    return ranks;
}

RankSet soft_ranks(const TwoSample& sample, const HaltonGrid& grid, double epsilon,
                   const SoftRankOptions& options) {
    check_sample(sample);
    check_grid(sample, grid);

    const Eigen::MatrixXd pooled = pool(sample);
    CostMatrix cost = cost_matrix(pooled, grid);
    if (options.normalize_cost) {
        cost = normalize_cost(std::move(cost));
    }
    const TransportPlan plan = solve_sinkhorn(cost, epsilon, options.sinkhorn);
    const Eigen::MatrixXd conditional = row_normalize(plan);
    const Eigen::MatrixXd all_ranks = conditional * grid.points;

    RankSet ranks;
    ranks.kind = RankKind::Soft;
    ranks.epsilon = epsilon;
    ranks.x_ranks = all_ranks.topRows(sample.m());
    ranks.y_ranks = all_ranks.bottomRows(sample.n());
    return ranks;
}

StatisticValue energy_statistic(const RankSet& ranks) {
    const auto m = ranks.x_ranks.rows();
    const auto n = ranks.y_ranks.rows();
    if (m < 1 || n < 1) {
        throw std::invalid_argument("energy_statistic: empty rank set");
    }

    // Pairs are accumulated in lexicographic rank order, which makes the
    // result independent of which sample is called x: swapping the samples
    // reproduces the identical value bit for bit.
    const auto total = m + n;
    const auto dim = ranks.x_ranks.cols();
    Eigen::MatrixXd pooled(total, dim);
    pooled.topRows(m) = ranks.x_ranks;
    pooled.bottomRows(n) = ranks.y_ranks;

    std::vector<int> order(static_cast<std::size_t>(total));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        for (Eigen::Index k = 0; k < dim; ++k) {
            if (pooled(a, k) != pooled(b, k)) {
                return pooled(a, k) < pooled(b, k);
            }
        }
        return false;
    });

    // Each unordered pair contributes once; the ordered self-sums in the
    // statistic double-count, hence the factor 2 below. Self-pairs are zero.
    double cross = 0.0;
    double within_x = 0.0;
    double within_y = 0.0;
    for (std::size_t a = 0; a + 1 < order.size(); ++a) {
        for (std::size_t b = a + 1; b < order.size(); ++b) {
            const int ia = order[a];
            const int ib = order[b];
            const double dist = (pooled.row(ia) - pooled.row(ib)).norm();
            const bool a_is_x = ia < m;
            const bool b_is_x = ib < m;
            if (a_is_x != b_is_x) {
                cross += dist;
            } else if (a_is_x) {
                within_x += dist;
            } else {
                within_y += dist;
            }
        }
    }

    const double md = static_cast<double>(m);
    const double nd = static_cast<double>(n);
    StatisticValue value;
    value.raw = 2.0 * (cross / (md * nd) - (within_x / (md * md) + within_y / (nd * nd)));
    value.scaled = value.raw * (md * nd / (md + nd));
    value.kind = ranks.kind == RankKind::Hard ? StatisticKind::RankEnergy
                                              : StatisticKind::SoftRankEnergy;
    value.epsilon = ranks.epsilon;
    return value;
}

StatisticValue rank_energy(const TwoSample& sample) {
    check_sample(sample);
    const HaltonGrid grid = generate_halton(sample.m() + sample.n(), sample.dim());
    return energy_statistic(hard_ranks(sample, grid));
}

StatisticValue soft_rank_energy(const TwoSample& sample, double epsilon,
                                const SoftRankOptions& options) {
    check_sample(sample);
    const HaltonGrid grid = generate_halton(sample.m() + sample.n(), sample.dim());
    return energy_statistic(soft_ranks(sample, grid, epsilon, options));
}

}  // namespace rankcpd
