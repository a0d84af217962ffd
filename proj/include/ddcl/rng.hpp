#ifndef DDCL_RNG_HPP
#define DDCL_RNG_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace ddcl::rng {

/// Coordinates identifying one noise draw. Sender and receiver build the
/// same key from shared configuration (seed) plus frame metadata (edge,
/// timestep, dim), so the noise value itself never crosses the wire.
struct NoiseKey {
    std::uint64_t seed = 0;
    std::uint32_t edge_id = 0;
    std::uint32_t timestep = 0;
    std::uint32_t dim = 0;

    friend bool operator==(const NoiseKey&, const NoiseKey&) = default;
};

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// SplitMix64 finalizer (Steele, Lea, Flood 2014; Vigna's constants).
/// A bijection on 64-bit words; all arithmetic is mod 2^64.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Fold the key fields into one 64-bit word, one field group per stage.
/// The exact chain is normative; see docs/noise.md for the cross-language
/// statement and data/noise_golden.csv for frozen check values.
constexpr std::uint64_t noise_word(const NoiseKey& key) noexcept {
    std::uint64_t w = mix64(key.seed + kGoldenGamma);
    w = mix64(w + ((static_cast<std::uint64_t>(key.edge_id) << 32) |
                   static_cast<std::uint64_t>(key.timestep)));
    w = mix64(w + static_cast<std::uint64_t>(key.dim));
    return w;
}

/// Top 53 bits of the word scaled to [0, 1). Exact in double precision,
/// so the result is reproducible bit-for-bit on any IEEE-754 platform.
constexpr double unit_from_word(std::uint64_t w) noexcept {
    return static_cast<double>(w >> 11) * 0x1.0p-53;
}

/// Uniform noise on [-delta/2, +delta/2), a pure function of the key.
/// The affine map is applied last, so noise_at(k, d) == d * noise_at(k, 1)
/// exactly.
inline double noise_at(const NoiseKey& key, double delta) {
    if (!std::isfinite(delta) || !(delta > 0.0)) {
        throw std::invalid_argument("noise_at: delta must be finite and > 0");
    }
    return delta * (unit_from_word(noise_word(key)) - 0.5);
}

/// Deterministic sample stream (SplitMix64) for everything that is not
/// channel noise: goal draws, spawn positions, action sampling, weight
/// init. Not for cross-agent synchronization; use NoiseKey for that.
class CounterStream {
public:
    explicit CounterStream(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next_u64() noexcept {
        state_ += kGoldenGamma;
        return mix64(state_);
    }

    /// Uniform on [0, 1).
    double next_unit() noexcept { return unit_from_word(next_u64()); }

    /// Uniform on [lo, hi).
    double next_range(double lo, double hi) noexcept {
        return lo + (hi - lo) * next_unit();
    }

    /// Uniform integer in [0, n) via a widening multiply.
    std::uint64_t next_below(std::uint64_t n) noexcept {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

private:
    std::uint64_t state_;
};

/// Stable seed derivation for independent substreams (train episodes,
/// eval episodes, parameter init, ...).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                                    std::uint64_t index) noexcept {
    std::uint64_t w = mix64(seed + kGoldenGamma);
    w = mix64(w + stream);
    w = mix64(w + index);
    return w;
}

}  // namespace ddcl::rng

#endif
