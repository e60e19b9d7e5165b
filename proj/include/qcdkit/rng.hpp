#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace qcd {

/// Deterministic random source used everywhere in the library.
///
/// Uniforms come from mt19937_64 (whose output sequence the standard pins
/// down exactly) and normals from the trigonometric Box-Muller transform, so
/// a seed reproduces the same stream bit-for-bit on every platform. The
/// std::*_distribution adaptors are avoided on purpose: their mapping from
/// engine output to variates is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform draw in [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal draw; consumes exactly two engine outputs.
    double normal() {
        const double u1 = static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
        const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;        // [0, 1)
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    static constexpr double kPi = 3.141592653589793238462643383279502884;
    std::mt19937_64 engine_;
};

/// Seed of the index-th substream of a master seed (SplitMix64).
///
/// Equals the (index+1)-th output of a SplitMix64 generator seeded with
/// `master`, computed statelessly so substreams can be claimed in any order.
/// Trials, sweep points and auxiliary draws all derive their generators
/// through this function, which is what makes parallel evaluation
/// order-independent.
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace qcd
