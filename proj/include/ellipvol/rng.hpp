#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <utility>

namespace ellipvol {

namespace detail {

inline constexpr std::uint64_t rotl64(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

// SplitMix64 step (Weyl increment + avalanche). Bijective on 64 bits.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace detail

// Seeded, splittable random stream: xoshiro256++ whose 256-bit state is
// derived from the (master seed, stream index) origin.
//
// State derivation (documented so results are reproducible elsewhere):
//   s[0] = mix64(master)
//   s[1] = mix64(index  ^ 0xbf58476d1ce4e5b9)
//   s[2] = mix64(master ^ 0x9e3779b97f4a7c15)
//   s[3] = mix64(index  ^ 0x94d049bb133111eb)
// mix64 is the SplitMix64 step, a bijection, so (master, index) -> state is
// injective: s[0] recovers master and s[1] recovers index. The state can
// never be all-zero because s[0] = 0 and s[2] = 0 require different masters.
//
// All output paths use integer arithmetic plus IEEE double operations in a
// fixed order, so identical origins reproduce identical sequences.
class RandomStream {
public:
    RandomStream() : RandomStream(0, 0) {}

    RandomStream(std::uint64_t master_seed, std::uint64_t stream_index)
        : master_(master_seed), index_(stream_index) {
        s_[0] = detail::mix64(master_seed);
        s_[1] = detail::mix64(stream_index ^ 0xbf58476d1ce4e5b9ULL);
        s_[2] = detail::mix64(master_seed ^ 0x9e3779b97f4a7c15ULL);
        s_[3] = detail::mix64(stream_index ^ 0x94d049bb133111ebULL);
    }

    std::uint64_t master_seed() const { return master_; }
    std::uint64_t stream_index() const { return index_; }

    // Child stream for nested parallel work (one per Monte Carlo draw).
    // The child's master folds in this stream's full origin, its index is
    // the caller-supplied child index.
    RandomStream split(std::uint64_t child_index) const {
        const std::uint64_t child_master =
            detail::mix64(master_ ^ detail::rotl64(detail::mix64(index_), 32) ^
                          0xd2b74407b1ce6e93ULL);
        return {child_master, child_index};
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl64(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = detail::rotl64(s_[3], 45);
        return result;
    }

    // Uniform on [0,1), 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0,1]; safe as a log() argument.
    double next_double_pos() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // One Box-Muller pair of independent N(0,1) draws. This is the fixed
    // normal generator of the toolkit: two uniforms per pair, consumed in
    // the order (radius, angle).
    std::pair<double, double> next_normal_pair() {
        const double u1 = next_double_pos();
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(a), r * std::sin(a)};
    }

    // Single N(0,1) draw; generates a pair and discards the sine half, so a
    // scalar draw always consumes exactly two uniforms.
    double next_normal() { return next_normal_pair().first; }

    // Fills `out` consuming one Box-Muller pair per two slots.
    void fill_normal(std::span<double> out) {
        std::size_t i = 0;
        for (; i + 1 < out.size(); i += 2) {
            const auto [z0, z1] = next_normal_pair();
            out[i] = z0;
            out[i + 1] = z1;
        }
        if (i < out.size()) out[i] = next_normal();
    }

    // Exp(1) draw.
    double next_exponential() { return -std::log(next_double_pos()); }

private:
    std::array<std::uint64_t, 4> s_{};
    std::uint64_t master_ = 0;
    std::uint64_t index_ = 0;
};

} // namespace ellipvol
