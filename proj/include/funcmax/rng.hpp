#pragma once

// Counter-based random numbers. Every value is a pure function of a 64-bit key
// and a 128-bit counter, so streams can be split across threads without any
// shared state and results never depend on scheduling.

#include <array>
#include <cstdint>
#include <span>

namespace funcmax::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
Counter philox4x32(Counter ctr, Key key) noexcept;

inline Key split_key(std::uint64_t k) noexcept {
    return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

/// SplitMix64 finalizer; used to derive child keys from (parent, index).
std::uint64_t mix64(std::uint64_t x) noexcept;
std::uint64_t derive(std::uint64_t parent, std::uint64_t index) noexcept;

/// Maps two 32-bit words to a double in the open interval (0, 1).
double to_unit_open(std::uint32_t hi, std::uint32_t lo) noexcept;

// Domain tags keep the streams of different consumers disjoint.
enum class Domain : std::uint32_t {
    multipliers = 0x4d554c54u,
    scores = 0x53434f52u,
    permutation = 0x5045524du,
};

/// Fills `out` with standard normals (Box-Muller). Pair m of the output uses
/// counter {m, c1, c2, domain}.
void fill_normals(std::span<double> out, std::uint64_t key, std::uint32_t c1, std::uint32_t c2,
                  Domain domain) noexcept;

/// Uniform double in (0, 1) at a fixed coordinate.
double uniform_at(std::uint64_t key, std::uint32_t c0, std::uint32_t c1, Domain domain) noexcept;

}  // namespace funcmax::rng
