#pragma once

#include <cstdint>
#include <random>

namespace divlab {

/// SplitMix64 finalizer. Used for counter-based seed derivation so that
/// trial i's stream never depends on how many trials ran before it.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Derives the seed for trial `index` of a campaign seeded with `base`.
/// Adding trials to a campaign never perturbs earlier trials.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return splitmix64(base ^ splitmix64(index));
}

/// Deterministic random source. Wraps std::mt19937_64 (fully specified by
/// the standard) and implements all sampling primitives explicitly, so
/// identical seeds give identical streams on every platform and compiler.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    /// Uniform integer in [0, bound). Rejection sampling, exactly uniform.
    std::uint64_t index(std::uint64_t bound) {
        // threshold = 2^64 mod bound
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = gen_();
            if (r >= threshold) return r % bound;
        }
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double real01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return real01() < p; }

private:
    std::mt19937_64 gen_;
};

} // namespace divlab
