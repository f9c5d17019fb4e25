#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace pseudovec {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Derives an independent stream seed from the run seed and a fixed label.
// Every random decision in a run flows from one config seed through this,
// so components cannot perturb each other's streams.
inline std::uint64_t fork_seed(std::uint64_t root_seed, std::string_view label) {
    std::uint64_t h = 14695981039346656037ull; // FNV-1a
    for (unsigned char c : label) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return splitmix64(root_seed ^ h);
}

// mt19937_64 with hand-rolled derivations. The standard distributions are
// implementation-defined, which would break byte-identical outputs across
// standard libraries; these are not.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform on [0, 1), 53-bit resolution
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // unbiased integer in [0, n), n > 0
    std::uint64_t below(std::uint64_t n) {
        std::uint64_t mask = n - 1;
        mask |= mask >> 1;
        mask |= mask >> 2;
        mask |= mask >> 4;
        mask |= mask >> 8;
        mask |= mask >> 16;
        mask |= mask >> 32;
        std::uint64_t v;
        do {
            v = gen_() & mask;
        } while (v >= n);
        return v;
    }

    // standard normal, Box-Muller; always consumes exactly two draws
    double normal() {
        const double u1 = static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53; // (0, 1]
        const double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;       // [0, 1)
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

  private:
    std::mt19937_64 gen_;
};

inline Rng fork_rng(std::uint64_t root_seed, std::string_view label) {
    return Rng(fork_seed(root_seed, label));
}

} // namespace pseudovec
