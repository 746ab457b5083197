#pragma once

// Counter-keyed random streams. A stream is identified by (seed, stream index);
// its state is derived by SplitMix64 hashing so streams can be created in any
// order, on any thread, and always produce the same sequence.

#include <array>
#include <bit>
#include <cstdint>
#include <limits>

namespace tailgap {

inline constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// xoshiro256** generator keyed by (seed, stream). Satisfies UniformRandomBitGenerator.
class RandomStream {
public:
    using result_type = std::uint64_t;

    explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0) noexcept {
        std::uint64_t mix = seed;
        const std::uint64_t key = splitmix64(mix) ^ (stream * 0xd1b54a32d192ed03ULL);
        std::uint64_t s = key;
        for (auto& word : state_) word = splitmix64(s);
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const std::uint64_t result = std::rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = std::rotl(state_[3], 45);
        return result;
    }

    /// Uniform on the open interval (0, 1); never returns 0 or 1.
    double uniform() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    std::array<std::uint64_t, 4> state_{};
};

}  // namespace tailgap
