#pragma once
// Deterministic, platform-independent random streams. The standard library's
// distributions are implementation-defined, so reproducibility across
// toolchains requires hand-rolled sampling on top of a fixed bit generator.
// Per-episode / per-trial streams are derived from a master seed by counter
// splitting, which keeps parallel simulation deterministic for any thread
// count.

#include <cstdint>

namespace voiplan {

inline std::uint64_t splitmix64_step(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {
        // decorrelate trivially related seeds
        (void)next();
        (void)next();
    }

    // Independent stream for (seed, counter); used for episode/trial splits.
    static Rng split(std::uint64_t seed, std::uint64_t counter) {
        std::uint64_t s = seed;
        std::uint64_t a = splitmix64_step(s);
        s = a ^ (counter * 0xD1342543DE82EF95ULL + 0x2545F4914F6CDD1DULL);
        std::uint64_t b = splitmix64_step(s);
        return Rng(b);
    }

    std::uint64_t next() { return splitmix64_step(state_); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n), n >= 1 (Lemire's bounded method, determinate)
    std::uint64_t below(std::uint64_t n) {
        std::uint64_t x = next();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t t = (0 - n) % n;
            while (lo < t) {
                x = next();
                m = static_cast<__uint128_t>(x) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // index into a cumulative sampling of `probs` (length n, sums to ~1)
    std::size_t categorical(const double* probs, std::size_t n) {
        const double u = uniform();
        double cum = 0.0;
        std::size_t last_pos = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            cum += probs[i];
            if (probs[i] > 0.0) last_pos = i;
            if (u < cum) return i;
        }
        return last_pos;
    }

  private:
    std::uint64_t state_;
};

}  // namespace voiplan
