#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace strokegen {

// Deterministic counter-based generator (splitmix64 over seed + counter).
// Integer and uniform draws are pure integer/IEEE arithmetic and therefore
// reproduce bit-identically for a given seed and call sequence.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : seed_(seed), counter_(0) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }

    std::uint64_t next_u64() {
        std::uint64_t z = seed_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n); n must be positive.
    std::uint64_t uniform_int(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Box-Muller. Draws two uniforms per call; no cached state.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        u1 = std::max(u1, 0x1.0p-100);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Independent substream for a tagged component (per writer, per epoch...).
    SeededRng fork(std::uint64_t tag) const {
        std::uint64_t z = seed_ ^ (0xA0761D6478BD642FULL + tag * 0xE7037ED1A0B428DBULL);
        z = (z ^ (z >> 32)) * 0xD6E8FEB86659FD93ULL;
        return SeededRng(z ^ (z >> 32));
    }

private:
    std::uint64_t seed_;
    std::uint64_t counter_;
};

}  // namespace strokegen
