#ifndef PORESIM_RNG_HPP
#define PORESIM_RNG_HPP

#include <cstdint>

namespace poresim {

/// SplitMix64 generator (Steele, Lea & Flood 2014). Chosen over std::mt19937_64
/// because the standard does not pin the output of the distribution adaptors,
/// so seeds would not reproduce across standard libraries. All randomness in
/// the simulator flows through this class; the draw conversions below are part
/// of the reproducibility contract.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) from the top 53 bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    /// Uniform integer in [0, n) by 128-bit multiply (Lemire reduction without
    /// the rejection step; the modulo bias is below 2^-64 and accepted as part
    /// of the pinned algorithm).
    std::uint64_t uniform_below(std::uint64_t n) {
        const auto wide = static_cast<unsigned __int128>(next_u64()) * n;
        return static_cast<std::uint64_t>(wide >> 64);
    }

    /// Uniform integer in [lo, hi] inclusive.
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
        return lo + uniform_below(hi - lo + 1);
    }

private:
    std::uint64_t state_;
};

} // namespace poresim

#endif
