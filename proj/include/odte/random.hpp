#pragma once

// Deterministic randomness utilities.
//
// All stochastic behaviour in the library flows through Rng, a thin wrapper
// around std::mt19937_64 whose bounded draws and shuffle are implemented by
// hand so that results are identical across standard library implementations
// (std::uniform_int_distribution and std::shuffle are not portable).
//
// Sub-seeds for independent streams (one per tree, one per fold, ...) are
// derived with mix(), a splitmix64-style hash of (seed, index).  Streams
// derived from distinct indices are statistically independent for practical
// purposes and reproducible from the root seed alone.

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace odte {

// splitmix64 finalizer (Steele, Lea & Flood; same constants as the reference
// implementation).
constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Deterministic sub-seed for stream `index` of root `seed`.
constexpr std::uint64_t mix(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(seed + 0x9E3779B97F4A7C15ull * (index + 1));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    // Unbiased draw in [0, bound) via rejection sampling.  bound must be > 0.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % bound;
        std::uint64_t value;
        do {
            value = engine_();
        } while (value >= limit);
        return value % bound;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double unit() { return double(engine_() >> 11) * 0x1.0p-53; }

    // Fisher-Yates shuffle; deterministic given the engine state.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[below(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace odte
