#include "rankcpd/ranks.hpp"

#include "support/test_util.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

using namespace rankcpd;

namespace {

TwoSample column_sample(std::vector<double> xs, std::vector<double> ys) {
    TwoSample sample;
    sample.xs = Eigen::Map<Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
    sample.ys = Eigen::Map<Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
    return sample;
}

// Permutation-null draws: under continuous exchangeable data the x ranks are
// a uniformly random m-subset of the grid, so the null law of the statistic
// is reproduced by random grid splits with no transport solves at all.
double split_quantile(const HaltonGrid& grid, int m, int trials, double q, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::vector<int> indices(static_cast<std::size_t>(grid.count()));
    std::vector<double> draws;
    draws.reserve(static_cast<std::size_t>(trials));
    for (int t = 0; t < trials; ++t) {
        std::iota(indices.begin(), indices.end(), 0);
        shuffle_values(indices, gen);
        RankSet ranks;
        ranks.x_ranks.resize(m, grid.dim());
        ranks.y_ranks.resize(grid.count() - m, grid.dim());
        for (int i = 0; i < grid.count(); ++i) {
            if (i < m) {
                ranks.x_ranks.row(i) = grid.points.row(indices[static_cast<std::size_t>(i)]);
            } else {
                ranks.y_ranks.row(i - m) = grid.points.row(indices[static_cast<std::size_t>(i)]);
            }
        }
        draws.push_back(energy_statistic(ranks).scaled);
    }
    std::sort(draws.begin(), draws.end());
    const auto rank = static_cast<std::size_t>(
        std::ceil(q * static_cast<double>(trials)));
    return draws[std::min(rank, draws.size()) - 1];
}

}  // namespace

TEST_CASE("hard ranks of {1,2} vs {3,4} land on the four grid fractions") {
    const TwoSample sample = column_sample({1, 2}, {3, 4});
    const RankSet ranks = hard_ranks(sample, generate_halton(4, 1));
    CHECK(ranks.x_ranks(0, 0) == 0.125);
    CHECK(ranks.x_ranks(1, 0) == 0.25);
    CHECK(ranks.y_ranks(0, 0) == 0.5);
    CHECK(ranks.y_ranks(1, 0) == 0.75);
    CHECK(ranks.kind == RankKind::Hard);
    CHECK(ranks.epsilon == 0.0);
}

TEST_CASE("hard ranks of a single pair split the two grid points by order") {
    const TwoSample sample = column_sample({5}, {7});
    const RankSet ranks = hard_ranks(sample, generate_halton(2, 1));
    CHECK(ranks.x_ranks(0, 0) == 0.25);
    CHECK(ranks.y_ranks(0, 0) == 0.5);
}

TEST_CASE("points already on the grid rank as themselves") {
    const HaltonGrid grid = generate_halton(6, 2);
    TwoSample sample;
    sample.xs = grid.points.topRows(2);
    sample.ys = grid.points.bottomRows(4);
    const RankSet ranks = hard_ranks(sample, grid);
    CHECK(ranks.x_ranks.cwiseEqual(sample.xs).all());
    CHECK(ranks.y_ranks.cwiseEqual(sample.ys).all());
}

TEST_CASE("one-dimensional hard ranks preserve order") {
    std::mt19937_64 gen(7777);
    for (int trial = 0; trial < 30; ++trial) {
        const int m = 1 + static_cast<int>(uniform_below(gen, 8));
        const int n = 1 + static_cast<int>(uniform_below(gen, 8));
        TwoSample sample;
        sample.xs = testutil::uniform_points(m, 1, gen());
        sample.ys = testutil::uniform_points(n, 1, gen());
        const HaltonGrid grid = generate_halton(m + n, 1);
        const RankSet ranks = hard_ranks(sample, grid);

        // With squared-distance cost in one dimension the unique optimal
        // matching is monotone: k-th smallest point gets k-th smallest node.
        std::vector<double> pooled;
        std::vector<double> pooled_ranks;
        for (int i = 0; i < m; ++i) {
            pooled.push_back(sample.xs(i, 0));
            pooled_ranks.push_back(ranks.x_ranks(i, 0));
        }
        for (int j = 0; j < n; ++j) {
            pooled.push_back(sample.ys(j, 0));
            pooled_ranks.push_back(ranks.y_ranks(j, 0));
        }
        std::vector<int> order(pooled.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return pooled[a] < pooled[b]; });
        std::vector<double> nodes(grid.points.data(), grid.points.data() + grid.count());
        std::sort(nodes.begin(), nodes.end());
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            CHECK(pooled_ranks[static_cast<std::size_t>(order[k])] == nodes[k]);
        }
    }
}

TEST_CASE("strong smoothing pulls every soft rank to the grid centroid") {
    TwoSample sample;
    sample.xs = testutil::gaussian_points(5, 2, 301);
    sample.ys = testutil::gaussian_points(7, 2, 302, 1.5);
    const HaltonGrid grid = generate_halton(12, 2);
    const Eigen::RowVectorXd centroid = grid.points.colwise().mean();
    const RankSet ranks = soft_ranks(sample, grid, 1e6);
    for (int i = 0; i < 5; ++i) {
        CHECK((ranks.x_ranks.row(i) - centroid).cwiseAbs().maxCoeff() <= 1e-3);
    }
    for (int j = 0; j < 7; ++j) {
        CHECK((ranks.y_ranks.row(j) - centroid).cwiseAbs().maxCoeff() <= 1e-3);
    }
    CHECK(ranks.kind == RankKind::Soft);
    CHECK(ranks.epsilon == 1e6);
}

TEST_CASE("weak smoothing reproduces hard ranks") {
    SoftRankOptions options;
    options.normalize_cost = true;
    options.sinkhorn = {40000, 1e-6, true, 1.8};
    // Instances whose optimal assignment has no near-tie at the 1e-4 scale;
    // near-tied instances legitimately split plan mass (checked below).
    for (const std::uint64_t seed : {11ULL, 14ULL, 16ULL, 18ULL, 19ULL,
                                     20ULL, 22ULL, 23ULL, 24ULL, 25ULL}) {
        TwoSample sample;
        sample.xs = testutil::gaussian_points(7, 2, seed);
        sample.ys = testutil::gaussian_points(9, 2, seed + 1000, 0.5);
        const HaltonGrid grid = generate_halton(16, 2);
        const RankSet hard = hard_ranks(sample, grid);
        const RankSet soft = soft_ranks(sample, grid, 1e-4, options);
        CHECK((hard.x_ranks - soft.x_ranks).cwiseAbs().maxCoeff() <= 1e-2);
        CHECK((hard.y_ranks - soft.y_ranks).cwiseAbs().maxCoeff() <= 1e-2);
    }

    // An instance that splits mass at 1e-4 collapses onto the hard ranks once
    // the regularizer drops below its assignment gap.
    TwoSample tied;
    tied.xs = testutil::gaussian_points(7, 2, 12);
    tied.ys = testutil::gaussian_points(9, 2, 1012, 0.5);
    const HaltonGrid grid = generate_halton(16, 2);
    const RankSet hard = hard_ranks(tied, grid);
    const RankSet wide = soft_ranks(tied, grid, 1e-4, options);
    const RankSet narrow = soft_ranks(tied, grid, 1e-5, options);
    CHECK((hard.x_ranks - wide.x_ranks).cwiseAbs().maxCoeff() > 1e-2);
    CHECK((hard.x_ranks - narrow.x_ranks).cwiseAbs().maxCoeff() <= 1e-4);
    CHECK((hard.y_ranks - narrow.y_ranks).cwiseAbs().maxCoeff() <= 1e-4);
}

TEST_CASE("soft ranks stay inside the grid's bounding box") {
    TwoSample sample;
    sample.xs = testutil::gaussian_points(10, 3, 401, -3.0, 2.0);
    sample.ys = testutil::gaussian_points(10, 3, 402, 3.0, 2.0);
    const HaltonGrid grid = generate_halton(20, 3);
    const RankSet ranks = soft_ranks(sample, grid, 0.5);
    for (int k = 0; k < 3; ++k) {
        const double lo = grid.points.col(k).minCoeff();
        const double hi = grid.points.col(k).maxCoeff();
        CHECK(ranks.x_ranks.col(k).minCoeff() >= lo - 1e-12);
        CHECK(ranks.x_ranks.col(k).maxCoeff() <= hi + 1e-12);
        CHECK(ranks.y_ranks.col(k).minCoeff() >= lo - 1e-12);
        CHECK(ranks.y_ranks.col(k).maxCoeff() <= hi + 1e-12);
    }
}

TEST_CASE("rank statistic of {1,2} vs {3,4} is exactly 11/16") {
    const StatisticValue value = rank_energy(column_sample({1, 2}, {3, 4}));
    CHECK(value.raw == 0.6875);
    CHECK(value.scaled == 0.6875);
    CHECK(value.kind == StatisticKind::RankEnergy);
    CHECK(value.epsilon == 0.0);
}

TEST_CASE("scaled value is raw times mn over m plus n") {
    TwoSample sample;
    sample.xs = testutil::gaussian_points(6, 2, 501);
    sample.ys = testutil::gaussian_points(9, 2, 502, 0.7);
    const StatisticValue value = rank_energy(sample);
    CHECK(value.scaled == value.raw * (6.0 * 9.0 / 15.0));
}

TEST_CASE("identical rank sets score zero") {
    RankSet ranks;
    ranks.x_ranks = generate_halton(8, 3).points;
    ranks.y_ranks = ranks.x_ranks;
    CHECK(std::abs(energy_statistic(ranks).raw) <= 1e-12);
}

TEST_CASE("swapping the samples reproduces the statistic bit for bit") {
    RankSet ranks;
    ranks.x_ranks = testutil::uniform_points(13, 3, 601);
    ranks.y_ranks = testutil::uniform_points(8, 3, 602);
    RankSet swapped;
    swapped.x_ranks = ranks.y_ranks;
    swapped.y_ranks = ranks.x_ranks;
    CHECK(energy_statistic(ranks).raw == energy_statistic(swapped).raw);
    CHECK(energy_statistic(ranks).scaled == energy_statistic(swapped).scaled);

    TwoSample sample;
    sample.xs = testutil::gaussian_points(11, 2, 603);
    sample.ys = testutil::gaussian_points(6, 2, 604, 0.4);
    TwoSample reversed;
    reversed.xs = sample.ys;
    reversed.ys = sample.xs;
    CHECK(rank_energy(sample).raw == rank_energy(reversed).raw);
}

TEST_CASE("the statistic is nonnegative") {
    std::mt19937_64 gen(71);
    for (int trial = 0; trial < 20; ++trial) {
        RankSet ranks;
        ranks.x_ranks = testutil::uniform_points(2 + static_cast<int>(uniform_below(gen, 9)),
                                                 3, gen());
        ranks.y_ranks = testutil::uniform_points(2 + static_cast<int>(uniform_below(gen, 9)),
                                                 3, gen());
        CHECK(energy_statistic(ranks).raw >= -1e-12);
    }
}

TEST_CASE("a single pair scores twice its rank distance") {
    RankSet ranks;
    ranks.x_ranks = testutil::uniform_points(1, 4, 81);
    ranks.y_ranks = testutil::uniform_points(1, 4, 82);
    const double dist = (ranks.x_ranks.row(0) - ranks.y_ranks.row(0)).norm();
    CHECK(energy_statistic(ranks).raw == 2.0 * dist);
}

TEST_CASE("soft statistic approaches the hard statistic as smoothing vanishes") {
    TwoSample sample;
    sample.xs = testutil::gaussian_points(16, 2, 901);
    sample.ys = testutil::gaussian_points(16, 2, 902, 1.0);
    const double hard = rank_energy(sample).raw;
    SoftRankOptions options;
    options.normalize_cost = true;
    options.sinkhorn = {40000, 1e-6, true, 1.8};
    std::vector<double> gaps;
    for (const double eps : {1.0, 1e-1, 1e-2, 1e-3, 1e-4}) {
        const double soft = soft_rank_energy(sample, eps, options).raw;
        gaps.push_back(std::abs(soft - hard));
    }
    CHECK(gaps.back() <= 1e-2);
    CHECK(gaps.back() < gaps.front());
}

TEST_CASE("smoothing shrinks the statistic under a small location shift") {
    double strong = 0.0;
    double weak = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        TwoSample sample;
        const auto seed = static_cast<std::uint64_t>(trial);
        sample.xs = testutil::gaussian_points(12, 2, mix64(1001, seed));
        sample.ys = testutil::gaussian_points(12, 2, mix64(2002, seed), 0.05);
        strong += soft_rank_energy(sample, 5.0).scaled;
        weak += soft_rank_energy(sample, 1e-3).scaled;
    }
    CHECK(weak / 50.0 > strong / 50.0);
}

TEST_CASE("soft statistic of a duplicated sample is numerically zero") {
    TwoSample sample;
    sample.xs = testutil::gaussian_points(9, 3, 1101);
    sample.ys = sample.xs;
    CHECK(std::abs(soft_rank_energy(sample, 0.5).raw) <= 1e-10);
}

TEST_CASE("huge smoothing drives the statistic to zero") {
    TwoSample sample;
    sample.xs = testutil::gaussian_points(8, 2, 1201);
    sample.ys = testutil::gaussian_points(8, 2, 1202, 2.0);
    CHECK(std::abs(soft_rank_energy(sample, 1e6).raw) <= 1e-6);
}

TEST_CASE("null draws stay below the permutation quantile") {
    const int m = 500;
    const HaltonGrid grid = generate_halton(2 * m, 3);
    const double q95 = split_quantile(grid, m, 200, 0.95, 4242);
    int below = 0;
    for (int trial = 0; trial < 100; ++trial) {
        TwoSample sample;
        const auto seed = static_cast<std::uint64_t>(trial);
        sample.xs = testutil::gaussian_points(m, 3, mix64(31, seed));
        sample.ys = testutil::gaussian_points(m, 3, mix64(32, seed));
        if (rank_energy(sample).scaled < q95) {
            ++below;
        }
    }
    CHECK(below >= 90);
}

TEST_CASE("a unit mean shift exceeds the permutation quantile") {
    const int m = 250;
    const HaltonGrid grid = generate_halton(2 * m, 3);
    const double q99 = split_quantile(grid, m, 200, 0.99, 4343);
    int above = 0;
    for (int trial = 0; trial < 60; ++trial) {
        TwoSample sample;
        const auto seed = static_cast<std::uint64_t>(trial);
        sample.xs = testutil::gaussian_points(m, 3, mix64(41, seed));
        sample.ys = testutil::gaussian_points(m, 3, mix64(42, seed), 1.0);
        if (rank_energy(sample).scaled > q99) {
            ++above;
        }
    }
    CHECK(above >= 57);
}

TEST_CASE("rank construction validates its inputs") {
    const TwoSample sample = column_sample({1, 2}, {3, 4});
    CHECK_THROWS_AS(hard_ranks(sample, generate_halton(5, 1)), std::invalid_argument);
    CHECK_THROWS_AS(hard_ranks(sample, generate_halton(4, 2)), std::invalid_argument);
    CHECK_THROWS_AS(soft_ranks(sample, generate_halton(3, 1), 0.5), std::invalid_argument);

    TwoSample empty;
    empty.xs = Eigen::MatrixXd(0, 1);
    empty.ys = Eigen::MatrixXd(2, 1);
    CHECK_THROWS_AS(rank_energy(empty), std::invalid_argument);

    TwoSample ragged;
    ragged.xs = Eigen::MatrixXd::Zero(2, 1);
    ragged.ys = Eigen::MatrixXd::Zero(2, 2);
    CHECK_THROWS_AS(rank_energy(ragged), std::invalid_argument);

    RankSet hollow;
    hollow.x_ranks = Eigen::MatrixXd(0, 2);
    hollow.y_ranks = Eigen::MatrixXd(2, 2);
    CHECK_THROWS_AS(energy_statistic(hollow), std::invalid_argument);
}
