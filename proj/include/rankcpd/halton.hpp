#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace rankcpd {

// Deterministic Halton low-discrepancy points in the open unit cube.
// Row i holds point i; coordinate k uses the k-th prime as the
// radical-inverse base. The sequence starts at index 1, so the origin is
// never emitted and every coordinate lies strictly in (0, 1).
struct HaltonGrid {
    Eigen::MatrixXd points;  // count x dim
    std::vector<int> bases;  // first dim primes

    int count() const { return static_cast<int>(points.rows()); }
    int dim() const { return static_cast<int>(points.cols()); }
};

// Van der Corput radical inverse of `index` in the given base.
double radical_inverse(std::uint64_t index, int base);

// First `count` Halton points (indices 1..count) in dimension `dim`.
// Supports dim <= 100; plain (unscrambled) Halton, so coordinate
// correlations appear well beyond small dim. Throws std::invalid_argument
// when count == 0, dim == 0 or dim > 100.
HaltonGrid generate_halton(int count, int dim);

}  // namespace rankcpd
