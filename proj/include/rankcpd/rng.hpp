#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

// Seeded randomness with a fixed, documented algorithm: mt19937_64 (bit-exact
// per the standard) plus explicit mappings to doubles, so results do not
// depend on implementation-defined std distributions.

namespace rankcpd {

// SplitMix64 finalizer; derives independent stream seeds from (seed, stream).
inline std::uint64_t mix64(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Uniform in (0, 1]; the open lower end keeps log() finite.
inline double uniform_open01(std::mt19937_64& gen) {
    return static_cast<double>((gen() >> 11) + 1) * 0x1.0p-53;
}

// Uniform in [0, 1).
inline double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Unbiased uniform integer in [0, bound) by rejection.
inline std::uint64_t uniform_below(std::mt19937_64& gen, std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t r = gen();
        if (r >= threshold) {
            return r % bound;
        }
    }
}

// Fisher-Yates with the rejection sampler above.
template <typename T>
void shuffle_values(std::vector<T>& values, std::mt19937_64& gen) {
    for (std::size_t i = values.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_below(gen, i));
        std::swap(values[i - 1], values[j]);
    }
}

// Standard normal draws via Box-Muller.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : gen_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        constexpr double kTwoPi = 6.283185307179586476925286766559;
        const double u1 = uniform_open01(gen_);
        const double u2 = uniform_open01(gen_);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = kTwoPi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace rankcpd
