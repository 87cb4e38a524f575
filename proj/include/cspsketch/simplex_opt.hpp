#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "cspsketch/common.hpp"
#include "cspsketch/rng.hpp"

namespace cspsketch {

/// All non-negative integer vectors of length `q` summing to `steps`,
/// emitted as probability vectors (entries multiples of 1/steps).
inline void enumerate_simplex_grid(int q, int steps,
                                   const std::function<void(const std::vector<double>&)>& fn) {
    std::vector<int> part(q, 0);
    std::vector<double> p(q, 0.0);
    std::function<void(int, int)> rec = [&](int pos, int left) {
        if (pos == q - 1) {
            part[pos] = left;
            for (int i = 0; i < q; ++i) p[i] = double(part[i]) / double(steps);
            fn(p);
            return;
        }
        for (int v = 0; v <= left; ++v) {
            part[pos] = v;
            rec(pos + 1, left - v);
        }
    };
    rec(0, steps);
}

inline std::int64_t simplex_grid_size(int q, int steps) {
    // C(steps + q - 1, q - 1)
    std::int64_t r = 1;
    for (int i = 1; i <= q - 1; ++i) r = r * (steps + i) / i;
    return r;
}

/// Largest step count whose grid stays within `budget` points.
inline int adaptive_grid_steps(int q, int preferred, std::int64_t budget) {
    int steps = preferred;
    while (steps > 2 && simplex_grid_size(q, steps) > budget) --steps;
    return steps;
}

struct SimplexMaxResult {
    std::vector<double> x;
    double value = -1e300;
};

/// Pairwise mass-transfer hill climbing with shrinking step size. Derivative
/// free and deterministic; refines grid optima of the smooth low-degree
/// polynomials this project maximizes.
template <typename Fn>
void polish_on_simplex(std::vector<double>& x, double& val, Fn&& eval, double step0,
                       double step_min = 1e-10) {
    const int q = static_cast<int>(x.size());
    for (double step = step0; step >= step_min; step *= 0.5) {
        bool improved = true;
        while (improved) {
            improved = false;
            for (int i = 0; i < q; ++i) {
                for (int j = 0; j < q; ++j) {
                    if (i == j || x[j] < step) continue;
                    x[i] += step;
                    x[j] -= step;
                    double v = eval(x);
                    if (v > val + 1e-15) {
                        val = v;
                        improved = true;
                    } else {
                        x[i] -= step;
                        x[j] += step;
                    }
                }
            }
        }
    }
}

/// Grid scan plus polish plus a few seeded random restarts.
template <typename Fn>
SimplexMaxResult maximize_over_simplex(int q, Fn&& eval, int grid_steps, int random_starts,
                                       std::uint64_t seed) {
    SimplexMaxResult best;
    enumerate_simplex_grid(q, grid_steps, [&](const std::vector<double>& p) {
        double v = eval(p);
        if (v > best.value) {
            best.value = v;
            best.x = p;
        }
    });
    std::vector<std::vector<double>> starts;
    starts.push_back(best.x);
    auto rng = make_rng(seed);
    for (int r = 0; r < random_starts; ++r) starts.push_back(random_simplex_point(rng, q));
    for (auto& s : starts) {
        double v = eval(s);
        polish_on_simplex(s, v, eval, 1.0 / grid_steps);
        if (v > best.value + 1e-15) {
            best.value = v;
            best.x = s;
        }
    }
    return best;
}

}  // namespace cspsketch
