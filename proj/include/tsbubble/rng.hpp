#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace tsbubble {

/**
 * @brief Seedable, portable random source.
 *
 * Wraps std::mt19937_64, whose output sequence is fixed by the standard.
 * Uniform and normal variates are derived here rather than through the
 * <random> distributions, whose algorithms are implementation-defined, so a
 * given seed yields the same draws with any standard library.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal via the Marsaglia polar method.
    double normal() noexcept;

    std::uint64_t next_u64() noexcept { return engine_(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// SplitMix64 finalizer; a bijective 64-bit mixer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Child seed for stream @p index under @p parent. Streams with distinct
/// (parent, index) pairs are statistically independent for practical purposes.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
    return mix64(mix64(parent) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// Stable 64-bit FNV-1a hash, used to key streams on textual descriptors.
[[nodiscard]] constexpr std::uint64_t stable_hash(std::string_view text) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace tsbubble
