#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace deflatron {

/// Seedable xorshift64* generator. The update rule (documented in the README
/// so other implementations can reproduce the streams exactly):
///
///   state ^= state >> 12; state ^= state << 25; state ^= state >> 27;
///   output = state * 0x2545F4914F6CDD1D
///
/// Seeds are first mixed through splitmix64 so that seed 0 is usable.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(splitmix64(seed)) {
        if (state_ == 0) state_ = 0x9E3779B97F4A7C15ull;
    }

    std::uint64_t next_u64() {
        state_ ^= state_ >> 12;
        state_ ^= state_ << 25;
        state_ ^= state_ >> 27;
        return state_ * 0x2545F4914F6CDD1Dull;
    }

    /// Uniform double in [0, 1), 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (pairwise, no rejection).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform(); // (0, 1], keeps log finite
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double th = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(th);
        have_spare_ = true;
        return r * std::cos(th);
    }

    std::vector<double> normals(std::size_t n) {
        std::vector<double> v(n);
        for (auto& x : v) x = normal();
        return v;
    }

    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound) { return next_u64() % bound; }

private:
    static std::uint64_t splitmix64(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace deflatron
