#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace picl {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// splitmix64 output function.
inline std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Sequential splitmix64 stream. State starts at the seed itself; the first
// draw advances by the golden-ratio increment before mixing, so the stream
// for seed s is mix64(s + kGolden), mix64(s + 2*kGolden), ...
class rng_stream {
public:
    explicit rng_stream(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        state_ += kGolden;
        return mix64(state_);
    }

    // Uniform draw in [0, n) via 128-bit multiply-shift. n must be > 0.
    std::uint64_t next_below(std::uint64_t n) noexcept {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_unit() noexcept {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    std::uint64_t state() const noexcept { return state_; }

private:
    std::uint64_t state_;
};

// Random access into the stream for `seed`: position k holds the (k+1)-th
// value rng_stream(seed) would produce.
inline std::uint64_t stream_at(std::uint64_t seed, std::uint64_t position) noexcept {
    return mix64(seed + (position + 1) * kGolden);
}

// Standard Gaussian draw addressed by (seed, index). Box-Muller over stream
// positions 2*index and 2*index+1; u1 is mapped into (0, 1] so the log is
// always finite. A pure function, so any partition of indices across threads
// yields bitwise identical values.
inline double gaussian_at(std::uint64_t seed, std::uint64_t index) noexcept {
    const std::uint64_t a = stream_at(seed, 2 * index);
    const std::uint64_t b = stream_at(seed, 2 * index + 1);
    const double u1 = static_cast<double>((a >> 11) + 1) * 0x1.0p-53;
    const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
    const double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

// Fold a labelled component into a seed. Strings hash via FNV-1a over bytes;
// integers fold directly. Chaining derive calls builds a seed tree whose
// branches are independent streams.
inline std::uint64_t derive_seed(std::uint64_t key, std::string_view tag) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ull ^ mix64(key);
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return mix64(h);
}

inline std::uint64_t derive_seed(std::uint64_t key, std::uint64_t component) noexcept {
    return mix64(key ^ (component + kGolden));
}

// In-place Fisher-Yates shuffle, iterating i = n-1..1 with j = draw in [0, i].
template <typename T>
void fisher_yates(std::vector<T>& values, std::uint64_t seed) {
    rng_stream rng(seed);
    for (std::size_t i = values.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(values[i - 1], values[j]);
    }
}

}  // namespace picl
