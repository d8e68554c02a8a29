#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
// Output is a pure function of (counter, key), so any sample can be
// regenerated independently of evaluation order or thread schedule.

#include <array>
#include <cstdint>

namespace overlap_ifs {

class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr int kRounds = 10;

    static constexpr Counter generate(Counter ctr, Key key) {
        ctr = round(ctr, key);
        for (int r = 1; r < kRounds; ++r) {
            key[0] += kW0;
            key[1] += kW1;
            ctr = round(ctr, key);
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kM0 = 0xD2511F53u;
    static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kW0 = 0x9E3779B9u;
    static constexpr std::uint32_t kW1 = 0xBB67AE85u;

    static constexpr Counter round(const Counter& c, const Key& k) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
};

/// 53-bit uniform double in [0, 1).
constexpr double u01_from_bits(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// splitmix64 finaliser; used to derive independent sub-seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Uniform doubles addressed by (seed, stream, index, position).
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint32_t stream, std::uint64_t index)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream),
          index_(index) {}

    /// Uniform in [0, 1) for the given position along the stream.
    [[nodiscard]] double uniform(std::uint64_t position) const {
        const std::uint64_t block = position >> 1;
        if (block != cached_block_ || !has_cache_) {
            const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block),
                                          static_cast<std::uint32_t>(block >> 32) ^ (stream_ << 16),
                                          static_cast<std::uint32_t>(index_),
                                          static_cast<std::uint32_t>(index_ >> 32)};
            cache_ = Philox4x32::generate(ctr, key_);
            cached_block_ = block;
            has_cache_ = true;
        }
        const std::size_t half = static_cast<std::size_t>(position & 1u) * 2;
        const std::uint64_t bits =
            (static_cast<std::uint64_t>(cache_[half]) << 32) | cache_[half + 1];
        return u01_from_bits(bits);
    }

private:
    Philox4x32::Key key_;
    std::uint32_t stream_;
    std::uint64_t index_;
    mutable Philox4x32::Counter cache_{};
    mutable std::uint64_t cached_block_ = 0;
    mutable bool has_cache_ = false;
};

}  // namespace overlap_ifs
