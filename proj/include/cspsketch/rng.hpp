#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace cspsketch {

// splitmix64; used both as a seed mixer and as the documented child-seed
// derivation: child_seed(seed, index) = splitmix64(seed ^ splitmix64(index)).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t child_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(seed ^ splitmix64(index));
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
    return std::mt19937_64(splitmix64(seed));
}

/// Uniform point on the probability simplex over `q` cells (exponential trick).
inline std::vector<double> random_simplex_point(std::mt19937_64& rng, int q) {
    std::exponential_distribution<double> exp1(1.0);
    std::vector<double> p(q);
    double s = 0.0;
    for (int i = 0; i < q; ++i) {
        p[i] = exp1(rng);
        s += p[i];
    }
    for (int i = 0; i < q; ++i) p[i] /= s;
    return p;
}

}  // namespace cspsketch
