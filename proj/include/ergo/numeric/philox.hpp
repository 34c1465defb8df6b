#pragma once

#include <array>
#include <cstdint>

namespace ergo {

// Philox4x32-10 counter-based generator (Salmon et al. 2011).
// Pure integer arithmetic, so a (key, counter) pair maps to the same output
// on every platform and under any thread schedule. Simulation code derives
// one stream per path and indexes it by step, which is what makes paths
// reproducible independent of how work is divided between threads.
namespace philox {

inline constexpr std::uint32_t mult0 = 0xD2511F53u;
inline constexpr std::uint32_t mult1 = 0xCD9E8D57u;
inline constexpr std::uint32_t weyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t weyl1 = 0xBB67AE85u;

inline std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                          std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(mult0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(mult1) * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
               static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
               static_cast<std::uint32_t>(p0)};
        key[0] += weyl0;
        key[1] += weyl1;
    }
    return ctr;
}

}  // namespace philox

// splitmix64 finalizer, used to spread user seeds and derive sub-seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Deterministic sub-seed for an independent purpose (ensemble leg, ladder
// rung, ...). Different salts give statistically independent streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
    return mix64(seed ^ mix64(salt));
}

// One random stream = (seed, stream index). at(i) is random access: the
// i-th draw costs the same wherever you start, and draws never depend on
// the order of previous calls.
class counter_stream {
public:
    counter_stream(std::uint64_t seed, std::uint64_t stream) {
        const std::uint64_t k = mix64(seed);
        key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
        stream_ = stream;
    }

    // Uniform on (0, 1), endpoints excluded so the normal quantile is finite.
    double uniform_at(std::uint64_t i) const {
        const auto words = philox::block(
            {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32),
             static_cast<std::uint32_t>(stream_),
             static_cast<std::uint32_t>(stream_ >> 32)},
            key_);
        const std::uint64_t bits =
            (static_cast<std::uint64_t>(words[1]) << 32) | words[0];
        return static_cast<double>(bits >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
};

}  // namespace ergo
