#pragma once

#include <cmath>
#include <cstdint>

namespace dprisk {

/// splitmix64 step; also used to derive substream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Small deterministic generator with portable output, so seeded runs are
/// byte-identical across platforms and standard-library versions.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    /// Derives an independent substream from a master seed and stream tags.
    static Rng stream(std::uint64_t master, std::uint64_t tag_a, std::uint64_t tag_b = 0,
                      std::uint64_t tag_c = 0) {
        std::uint64_t s = master;
        std::uint64_t mix = splitmix64(s) ^ (tag_a * 0xff51afd7ed558ccdULL);
        mix = splitmix64(mix) ^ (tag_b * 0xc4ceb9fe1a85ec53ULL);
        mix = splitmix64(mix) ^ (tag_c * 0x9e3779b97f4a7c15ULL);
        return Rng(splitmix64(mix));
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n), n > 0. Lemire rejection-free multiply-shift
    /// (bias < 2^-64, irrelevant at our n).
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Uniform integer in [lo, hi] inclusive.
    std::int64_t between(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    /// Poisson by inversion; fine for the small means used here.
    int poisson(double lambda) {
        if (lambda <= 0.0) {
            return 0;
        }
        const double limit = std::exp(-lambda);
        double product = 1.0;
        int count = 0;
        while (true) {
            product *= uniform();
            if (product <= limit) {
                return count;
            }
            ++count;
            if (count > 1000) { // unreachable for our lambda range
                return count;
            }
        }
    }

    double exponential(double mean) {
        double u = uniform();
        while (u <= 0.0) {
            u = uniform();
        }
        return -mean * std::log(u);
    }

  private:
    std::uint64_t state_;
};

/// FNV-1a for stable string-keyed substreams.
constexpr std::uint64_t fnv1a(const char* data, std::size_t size) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < size; ++i) {
        hash ^= static_cast<unsigned char>(data[i]);
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

inline std::uint64_t fnv1a(const std::string& text) { return fnv1a(text.data(), text.size()); }

} // namespace dprisk
