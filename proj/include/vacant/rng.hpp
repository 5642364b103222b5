#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace vacant {

/// SplitMix64 finalizer. Used for seed derivation and digests.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Stream seed for replica `replica` of an experiment seeded with `master`.
///
/// stream_seed(m, r) = mix(mix(m) + (r + 1) * 0x9e3779b97f4a7c15)
///
/// The mapping depends only on (master, replica), so a shard covering replicas
/// [b, e) draws exactly the streams a monolithic run would use for them.
constexpr std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t replica) noexcept
{
    return splitmix64_mix(splitmix64_mix(master) + (replica + 1) * 0x9e3779b97f4a7c15ULL);
}

/// xoshiro256** 1.0 (Blackman & Vigna), seeded by expanding a 64-bit seed
/// through SplitMix64. Satisfies UniformRandomBitGenerator.
class Xoshiro256ss {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256ss(std::uint64_t seed = 0) noexcept { reseed(seed); }

    void reseed(std::uint64_t seed) noexcept
    {
        std::uint64_t x = seed;
        for (auto& w : s_) {
            x += 0x9e3779b97f4a7c15ULL;
            w = splitmix64_mix(x);
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    const std::array<std::uint64_t, 4>& state() const noexcept { return s_; }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept
    {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> s_{};
};

/// Unbiased integer in [0, bound) by Lemire's multiply-and-reject method.
template <class Rng>
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) noexcept
{
    std::uint64_t x = rng();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            x = rng();
            m = static_cast<__uint128_t>(x) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

/// Uniform double in [0, 1) with 53 random bits.
template <class Rng>
double uniform_unit(Rng& rng) noexcept
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace vacant
