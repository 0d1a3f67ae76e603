#pragma once

// Portable seeded randomness. std::mt19937_64 and std::seed_seq are fully
// specified by the standard; the uniform mapping below is ours, so streams
// are identical across standard libraries.

#include <cstdint>
#include <random>

namespace qfa {

inline constexpr const char* generator_name = "mt19937_64/seed_seq(seed,index)/u53";

/// Independent engine for work unit `index` of a run seeded with `seed`.
inline std::mt19937_64 sample_engine(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

/// Uniform on [0, 1) from the top 53 bits.
inline double uniform01(std::mt19937_64& engine) {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

/// Uniform on [-1, 1).
inline double uniform_pm1(std::mt19937_64& engine) { return 2.0 * uniform01(engine) - 1.0; }

inline double uniform(std::mt19937_64& engine, double lo, double hi) {
    return lo + (hi - lo) * uniform01(engine);
}

}  // namespace qfa
