#include "funcmax/rng.hpp"

#include <cmath>
#include <numbers>

namespace funcmax::rng {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Counter philox4x32(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t derive(std::uint64_t parent, std::uint64_t index) noexcept {
    return mix64(mix64(parent) ^ (index * 0xD1B54A32D192ED03ull + 0x8CB92BA72F3D8DD7ull));
}

double to_unit_open(std::uint32_t hi, std::uint32_t lo) noexcept {
    // 52 random bits offset by half a step: every value is exact and neither
    // 0 nor 1 is produced.
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi >> 6) << 26) | (lo >> 6);
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

void fill_normals(std::span<double> out, std::uint64_t key, std::uint32_t c1, std::uint32_t c2,
                  Domain domain) noexcept {
    const Key k = split_key(key);
    const std::size_t pairs = (out.size() + 1) / 2;
    for (std::size_t m = 0; m < pairs; ++m) {
        const Counter r =
            philox4x32({static_cast<std::uint32_t>(m), c1, c2, static_cast<std::uint32_t>(domain)}, k);
        const double u1 = to_unit_open(r[0], r[1]);
        const double u2 = to_unit_open(r[2], r[3]);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        out[2 * m] = radius * std::cos(angle);
        if (2 * m + 1 < out.size()) out[2 * m + 1] = radius * std::sin(angle);
    }
}

double uniform_at(std::uint64_t key, std::uint32_t c0, std::uint32_t c1, Domain domain) noexcept {
    const Counter r = philox4x32({c0, c1, 0u, static_cast<std::uint32_t>(domain)}, split_key(key));
    return to_unit_open(r[0], r[1]);
}

}  // namespace funcmax::rng
