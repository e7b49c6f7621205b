#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace mmwave {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace detail

/// xoshiro256++ generator with portable distribution helpers.
///
/// Standard-library distributions are implementation-defined, so all draws
/// go through this class to keep simulations reproducible from a seed alone.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = detail::splitmix64(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in (0, 1]; safe as a log() argument.
    double uniform_open_zero() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    /// Standard normal via Box-Muller; the paired draw is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform_open_zero()));
        const double phi = 2.0 * 3.14159265358979323846 * uniform();
        spare_ = r * std::sin(phi);
        has_spare_ = true;
        return r * std::cos(phi);
    }

    double normal(double mean, double stddev) {
        return mean + stddev * normal();
    }

    /// Poisson count by summing exponential inter-arrivals until `mean` is exceeded.
    long poisson(double mean) {
        if (mean < 0.0) throw std::invalid_argument("poisson: negative mean");
        if (mean == 0.0) return 0;
        long k = 0;
        double acc = 0.0;
        while (true) {
            acc += -std::log(uniform_open_zero());
            if (acc > mean) return k;
            ++k;
        }
    }

private:
    std::uint64_t state_[4];
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Named substreams: every random role in a run draws from its own generator
/// so scenarios stay reproducible and individual stages can be re-run alone.
enum class Stream : std::uint64_t {
    Users = 1,
    Blockers = 2,
    ShadowFading = 3,
    Experiment = 4,
};

inline std::uint64_t substream_seed(std::uint64_t master, Stream stream, std::uint64_t iteration) {
    std::uint64_t s = master;
    std::uint64_t a = detail::splitmix64(s);
    s = a ^ (static_cast<std::uint64_t>(stream) * 0xA24BAED4963EE407ull);
    std::uint64_t b = detail::splitmix64(s);
    s = b ^ (iteration * 0x9FB21C651E98DF25ull);
    return detail::splitmix64(s);
}

inline Rng substream(std::uint64_t master, Stream stream, std::uint64_t iteration = 0) {
    return Rng(substream_seed(master, stream, iteration));
}

} // namespace mmwave
