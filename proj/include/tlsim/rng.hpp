#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace tlsim {

/// Deterministic splittable random stream: a master seed plus a stream id
/// fully determine the sequence. Fixed purposes get fixed stream ids, so
/// draws are independent of evaluation order (and of threading).
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream)
        : state_(mix(master_seed + 0x9e3779b97f4a7c15ULL * (stream + 1))) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    /// Uniform in (0, 1].
    double uniform01() { return double((next_u64() >> 11) + 1) * 0x1.0p-53; }

    /// Standard normal (Box-Muller, two uniforms per draw, no caching).
    double gaussian() {
        const double u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Circular complex Gaussian with E|z|^2 = 1.
    std::complex<double> complex_gaussian() {
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(a), r * std::sin(a)};
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

} // namespace tlsim
