#include "rankcpd/halton.hpp"

#include <stdexcept>

namespace rankcpd {

namespace {

// First 100 primes; one radical-inverse base per coordinate.
constexpr int kPrimes[100] = {
    2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,  43,
    47,  53,  59,  61,  67,  71,  73,  79,  83,  89,  97,  101, 103, 107,
    109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181,
    191, 193, 197, 199, 211, 223, 227, 229, 233, 239, 241, 251, 257, 263,
    269, 271, 277, 281, 283, 293, 307, 311, 313, 317, 331, 337, 347, 349,
    353, 359, 367, 373, 379, 383, 389, 397, 401, 409, 419, 421, 431, 433,
    439, 443, 449, 457, 461, 463, 467, 479, 487, 491, 499, 503, 509, 521,
    523, 541};

}  // namespace

double radical_inverse(std::uint64_t index, int base) {
    const double inv_base = 1.0 / base;
    double result = 0.0;
    double digit_weight = inv_base;
    while (index > 0) {
        result += static_cast<double>(index % base) * digit_weight;
        index /= base;
        digit_weight *= inv_base;
    }
    return result;
}

HaltonGrid generate_halton(int count, int dim) {
    if (count < 1) {
        throw std::invalid_argument("generate_halton: count must be >= 1");
    }
    if (dim < 1 || dim > 100) {
        throw std::invalid_argument("generate_halton: dim must be in [1, 100]");
    }

    HaltonGrid grid;
    grid.bases.assign(kPrimes, kPrimes + dim);
    grid.points.resize(count, dim);
    for (int i = 0; i < count; ++i) {
        const auto index = static_cast<std::uint64_t>(i) + 1;  // skip the origin
        for (int k = 0; k < dim; ++k) {
            grid.points(i, k) = radical_inverse(index, grid.bases[k]);
        }
    }
    return grid;
}

}  // namespace rankcpd
