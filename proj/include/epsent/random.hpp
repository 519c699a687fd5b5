#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace epsent {

// SplitMix64 finalizer (Steele, Lea, Flood 2014). Used as the seed mixer for
// every derived stream; its output is part of the reproducibility contract.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Folds `parts` into `seed`: h = splitmix64(seed); h = splitmix64(h ^ (part + 1)) ...
constexpr std::uint64_t mix_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> parts) noexcept {
    std::uint64_t h = splitmix64(seed);
    for (std::uint64_t p : parts) h = splitmix64(h ^ (p + 1));
    return h;
}

// Stream tags so the noise, refresh-bit, burn-in and Monte-Carlo streams
// derived from one seed never overlap.
namespace stream {
inline constexpr std::uint64_t noise = 0x6e6f697365ULL;
inline constexpr std::uint64_t refresh_bits = 0x62697473ULL;
inline constexpr std::uint64_t initial_condition = 0x783030ULL;
inline constexpr std::uint64_t monte_carlo = 0x6d63ULL;
}  // namespace stream

/// Uniform double in [0,1) from the top 53 bits of a 64-bit draw.
/// Bit-reproducible across platforms, unlike std::uniform_real_distribution.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Hands out single random bits, 64 per engine draw.
class BitSource {
public:
    explicit BitSource(std::uint64_t seed) : rng_(seed) {}

    std::uint64_t next() {
        if (left_ == 0) {
            word_ = rng_();
            left_ = 64;
        }
        const std::uint64_t bit = word_ & 1U;
        word_ >>= 1;
        --left_;
        return bit;
    }

private:
    std::mt19937_64 rng_;
    std::uint64_t word_ = 0;
    int left_ = 0;
};

}  // namespace epsent
