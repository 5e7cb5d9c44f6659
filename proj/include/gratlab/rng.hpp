#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gratlab {

/// splitmix64 mixer (Vigna). Used to derive statistically independent
/// sub-seeds from (master seed, item index) so that parallel and serial
/// execution of a batch draw identical per-item streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t sub_seed(std::uint64_t master, std::uint64_t index,
                              std::uint64_t attempt = 0) {
    std::uint64_t s = splitmix64(master ^ splitmix64(index + 1));
    if (attempt) s = splitmix64(s ^ splitmix64(attempt));
    return s;
}

/// Standard-normal sampler over mt19937_64 with an explicit Box-Muller
/// transform. std::normal_distribution is implementation-defined, so the
/// stream would not be portable across standard libraries; this one is
/// fully specified by the engine. One normal consumes exactly two
/// 64-bit draws (the sine partner is discarded).
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : eng_(seed) {}

    double operator()() {
        // u1 in (0,1], u2 in [0,1)
        const double u1 = (static_cast<double>(eng_() >> 11) + 1.0) * 0x1p-53;
        const double u2 = static_cast<double>(eng_() >> 11) * 0x1p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

private:
    std::mt19937_64 eng_;
};

} // namespace gratlab
