#pragma once

#include <cstdint>
#include <random>

namespace mmdr {

// splitmix64; used to derive independent engine seeds from (run seed, stream id).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
    return splitmix64(splitmix64(seed ^ 0x6d6d6472ULL) ^ splitmix64(stream * 0x9e3779b97f4a7c15ULL + index));
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
    return Rng(derive_seed(seed, stream, index));
}

// For seeds that are already derived/raw 64-bit material.
inline Rng make_rng(std::uint64_t raw) { return Rng(raw); }

inline double uniform(Rng& rng, double lo, double hi) {
    if (lo == hi) return lo;
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
    if (lo == hi) return lo;
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Stream ids; keeps draw sequences of unrelated subsystems independent.
namespace stream {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kEnv = 2;
inline constexpr std::uint64_t kAction = 3;
inline constexpr std::uint64_t kShuffle = 4;
inline constexpr std::uint64_t kEval = 5;
}  // namespace stream

}  // namespace mmdr
