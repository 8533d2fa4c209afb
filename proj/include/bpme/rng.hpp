#pragma once

#include <cstdint>

namespace bpme {

// RNG identification embedded in every report so runs can be reproduced.
inline constexpr const char* kRngAlgorithm = "xoshiro256++";
inline constexpr const char* kRngSeeding = "splitmix64";
inline constexpr const char* kRngVersion = "1.0";

/// splitmix64 (Steele, Lea, Flood 2014). Used only to expand and derive seeds.
struct SplitMix64 {
    std::uint64_t state;

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

/// Stateless per-stream seed: a pure function of (seed, index), so stream k
/// can be constructed without generating streams 0..k-1.
inline std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 s{seed + index * 0x9E3779B97F4A7C15ULL};
    return s.next();
}

/// xoshiro256++ 1.0 (Blackman, Vigna 2019), state seeded via splitmix64.
class Xoshiro256PlusPlus {
  public:
    using result_type = std::uint64_t;

    explicit Xoshiro256PlusPlus(std::uint64_t seed) {
        SplitMix64 sm{seed};
        for (auto& w : s_) w = sm.next();
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;  // all-zero state is absorbing
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0,1) from the top 53 bits. Conversion is done by
    /// hand so results are identical across platforms and standard libraries.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

/// RNG stream for trajectory `index` of an ensemble with the given master
/// seed. Pure in (master_seed, index); independent of evaluation order.
inline Xoshiro256PlusPlus trajectory_stream(std::uint64_t master_seed, std::uint64_t index) {
    return Xoshiro256PlusPlus(splitmix64_at(master_seed, index));
}

}  // namespace bpme
