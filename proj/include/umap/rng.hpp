#pragma once

#include <cstdint>
#include <random>

namespace umap {

/// Named sub-streams. Each consumer of randomness draws from its own stream so
/// that, e.g., changing the epoch count never perturbs kNN initialization.
enum class Stream : std::uint64_t {
    knn_init = 1,
    edge_sampling = 2,
    negative_sampling = 3,
    subsampling = 4,
    spectral = 5,
    random_init = 6,
    cross_entropy = 7,
};

/**
 * Deterministic pseudo-random generator.
 *
 * The engine is std::mt19937_64, whose output sequence is fixed by the C++
 * standard. Seeds are expanded with SplitMix64, and all conversions to
 * doubles and bounded integers are done here rather than through the
 * implementation-defined std:: distributions, so a seed yields the same
 * stream on every platform.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix(seed)) {}

    std::uint64_t seed() const { return seed_; }

    /// Independent child stream keyed by (seed, stream id).
    Rng split(Stream stream) const { return split(static_cast<std::uint64_t>(stream)); }
    Rng split(std::uint64_t stream_id) const {
        return Rng(mix(seed_ ^ mix(stream_id + 0x9E3779B97F4A7C15ULL)));
    }

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Lemire's multiply-shift with rejection.
    std::uint64_t below(std::uint64_t n) {
        auto x = engine_();
        auto m = static_cast<unsigned __int128>(x) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                x = engine_();
                m = static_cast<unsigned __int128>(x) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Standard normal via Box-Muller (one value per call, the pair's twin is discarded).
    double normal();

    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace umap
