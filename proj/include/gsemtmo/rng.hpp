#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace gsemtmo {

// Every random draw in the project comes from a SplitMix64 stream derived
// from a single root seed. Child streams are derived by label:
//   child_seed = splitmix(root ^ fnv1a(label))
// so adding or removing one consumer never shifts the draws of another.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1), 53-bit resolution.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_unit();
    }

    // Unbiased integer in [0, bound) via rejection.
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound == 0) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % bound;
    }

    bool next_bernoulli(double p) { return next_unit() < p; }

    // Standard normal via Box-Muller (two uniforms per call, no caching).
    double next_normal() {
        double u1 = next_unit();
        double u2 = next_unit();
        while (u1 <= 0.0) u1 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

private:
    std::uint64_t state_;
};

std::uint64_t fnv1a(std::string_view s);

inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label) {
    Rng mixer(root ^ fnv1a(label));
    return mixer.next_u64();
}

inline Rng derive_stream(std::uint64_t root, std::string_view label) {
    return Rng(derive_seed(root, label));
}

// Fisher-Yates with our own integer draws; std::shuffle is
// implementation-defined and would tie checkpoints to the stdlib.
template <typename T>
void deterministic_shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace gsemtmo
